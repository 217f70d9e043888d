#include "mica/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "parallel.hpp"

namespace mica {

Method method_from_string(const std::string& s) {
    if (s == "mica") return Method::Mica;
    if (s == "mica-sequential") return Method::MicaSequential;
    if (s == "gmica-known") return Method::GmicaKnown;
    if (s == "gmica-alg1") return Method::GmicaAlg1;
    throw std::invalid_argument("unknown method: " + s);
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Mica: return "mica";
        case Method::MicaSequential: return "mica-sequential";
        case Method::GmicaKnown: return "gmica-known";
        case Method::GmicaAlg1: return "gmica-alg1";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    design.validate();
    if (replications < 1)
        throw std::invalid_argument("config: replications must be >= 1");
    if (h0 < 1) throw std::invalid_argument("config: h0 must be >= 1");
    if (!(c0 > 0.0) || c0 > 1.0)
        throw std::invalid_argument("config: c0 must be in (0, 1]");
    if (n_starts < 1) throw std::invalid_argument("config: n_starts must be >= 1");
    if (max_outer < 1) throw std::invalid_argument("config: max_outer must be >= 1");
}

namespace {

std::vector<int> sorted_desc(std::vector<int> v) {
    std::sort(v.begin(), v.end(), std::greater<int>());
    return v;
}

std::vector<SemiOrthoBlock> split_blocks(const Matrix& q,
                                         const std::vector<int>& sizes) {
    std::vector<SemiOrthoBlock> blocks;
    Index at = 0;
    for (int s : sizes) {
        blocks.push_back(SemiOrthoBlock::from(q.middleCols(at, s)));
        at += s;
    }
    return blocks;
}

ReplicationRecord run_one(const ExperimentConfig& cfg, int rep) {
    ReplicationRecord rec;
    rec.seed = cfg.base_seed + static_cast<std::uint64_t>(rep);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        DgpSpec spec = cfg.design;
        spec.seed = rec.seed;
        const GeneratedData data = generate(spec);
        const WhitenResult wr = whiten(data.y);

        MicaConfig mc;
        mc.h0 = cfg.h0;
        mc.n_starts = cfg.n_starts;
        mc.max_iter = cfg.max_iter;
        mc.tol_obj = cfg.tol_obj;
        mc.seed = rec.seed;

        const std::vector<int> true_sizes = sorted_desc(data.groups_true.sizes);
        switch (cfg.method) {
            case Method::Mica:
            case Method::MicaSequential: {
                const EstimationResult est =
                    cfg.method == Method::Mica
                        ? estimate_mica(wr.w, mc)
                        : estimate_mica_sequential(wr.w, mc);
                rec.distance = d_distance_scaled(data.b_true, est.a_hat);
                rec.groups_found.assign(static_cast<std::size_t>(wr.w.cols()), 1);
                rec.correct_segmentation =
                    sorted_desc(rec.groups_found) == true_sizes;
                break;
            }
            case Method::GmicaKnown: {
                const EstimationResult est =
                    estimate_gmica_known(wr.w, data.groups_true, mc);
                rec.distance = dtilde_distance_scaled(
                    split_blocks(data.b_true.mat(), data.groups_true.sizes),
                    split_blocks(est.a_hat.mat(), data.groups_true.sizes));
                rec.groups_found = data.groups_true.sizes;
                rec.correct_segmentation = true;
                break;
            }
            case Method::GmicaAlg1: {
                Algorithm1Options opts;
                opts.c0 = cfg.c0;
                opts.eps_frob = cfg.eps_frob;
                opts.max_outer = cfg.max_outer;
                const Gmica1Result res = algorithm1(wr.w, mc, opts);
                rec.groups_found = res.groups.sizes;
                rec.correct_segmentation =
                    sorted_desc(res.groups.sizes) == true_sizes;
                if (rec.correct_segmentation)
                    rec.distance = dtilde_distance_scaled(
                        split_blocks(data.b_true.mat(), data.groups_true.sizes),
                        split_blocks(res.a_hat.mat(), res.groups.sizes));
                else
                    rec.distance = std::numeric_limits<double>::quiet_NaN();
                break;
            }
        }
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
        rec.distance = std::numeric_limits<double>::quiet_NaN();
    }
    rec.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return rec;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.per_replication.resize(static_cast<std::size_t>(cfg.replications));
    detail::parallel_for_indexed(
        static_cast<std::size_t>(cfg.replications), cfg.workers,
        [&](std::size_t r) {
            report.per_replication[r] = run_one(cfg, static_cast<int>(r));
        });

    int failures = 0, correct = 0;
    std::vector<double> dists;
    for (const auto& rec : report.per_replication) {
        if (rec.failed) {
            ++failures;
            continue;
        }
        if (rec.correct_segmentation) ++correct;
        const bool include_distance =
            (cfg.method == Method::Mica || cfg.method == Method::MicaSequential ||
             cfg.method == Method::GmicaKnown)
                ? true
                : rec.correct_segmentation;
        if (include_distance && std::isfinite(rec.distance))
            dists.push_back(rec.distance);
    }
    if (failures * 5 > cfg.replications)
        throw NumericalError("run_experiment: more than 20% of replications failed");

    ExperimentSummary& s = report.summary;
    s.failures = failures;
    s.distance_count = static_cast<int>(dists.size());
    s.pi = static_cast<double>(correct) / cfg.replications;
    if (!dists.empty()) {
        s.mean_distance = pairwise_sum(dists) / static_cast<double>(dists.size());
        if (dists.size() > 1) {
            double ss = 0.0;
            for (double d : dists) ss += (d - s.mean_distance) * (d - s.mean_distance);
            s.sd_distance = std::sqrt(ss / static_cast<double>(dists.size() - 1));
        }
    }
    s.total_runtime_s =
        cfg.timing
            ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                  .count()
            : 0.0;
    return report;
}

void write_report(const ExperimentConfig& cfg, const ExperimentReport& report) {
    if (cfg.output_path.empty())
        throw std::invalid_argument("write_report: no output path configured");
    std::ofstream out(cfg.output_path, std::ios::binary);
    if (!out)
        throw ParseError(cfg.output_path + ": cannot open file for writing");
    out << "# micats experiment report\n";
    out << "# setting: " << cfg.setting_name << "\n";
    out << "# design=" << to_string(cfg.design.design)
        << " p=" << cfg.design.p << " n=" << cfg.design.n
        << " dist=" << to_string(cfg.design.dist) << " method="
        << to_string(cfg.method) << " h0=" << cfg.h0
        << " replications=" << cfg.replications
        << " base_seed=" << cfg.base_seed << "\n";
    out << "# distances are scaled D^2 (or Dtilde^2 for grouped methods) against\n";
    out << "# the whitening-adjusted truth: QR(cov(y)^{-1/2} * A_true * "
           "covbd(x)^{1/2}),\n";
    out << "# covbd = sample covariance of the latent components with "
           "cross-group blocks zeroed.\n";
    out << "# grouped-method distance statistics cover correctly segmented "
           "replications only.\n";
    out << "# runtime columns are 0 unless --timing was given.\n";
    out << "setting,mean_d2,sd_d2,runtime,pi,replications,used,failures\n";
    const ExperimentSummary& s = report.summary;
    out << cfg.setting_name << ',' << format_double(s.mean_distance) << ','
        << format_double(s.sd_distance) << ','
        << format_double(cfg.timing ? s.total_runtime_s : 0.0) << ','
        << format_double(s.pi) << ',' << cfg.replications << ','
        << s.distance_count << ',' << s.failures << "\n";
    if (!out) throw ParseError(cfg.output_path + ": write failed");

    std::ofstream reps(cfg.output_path + ".reps.csv", std::ios::binary);
    if (!reps)
        throw ParseError(cfg.output_path + ".reps.csv: cannot open for writing");
    reps << "replication,seed,distance,groups_found,correct_segmentation,"
            "runtime,failed,error\n";
    for (std::size_t r = 0; r < report.per_replication.size(); ++r) {
        const auto& rec = report.per_replication[r];
        reps << r << ',' << rec.seed << ',' << format_double(rec.distance)
             << ',';
        for (std::size_t g = 0; g < rec.groups_found.size(); ++g) {
            if (g) reps << ';';
            reps << rec.groups_found[g];
        }
        reps << ',' << (rec.correct_segmentation ? 1 : 0) << ','
             << format_double(cfg.timing ? rec.runtime_s : 0.0) << ','
             << (rec.failed ? 1 : 0) << ',' << rec.error << "\n";
    }
    if (!reps) throw ParseError(cfg.output_path + ".reps.csv: write failed");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void config_fail(const std::string& path, std::size_t line,
                              const std::string& msg) {
    throw ParseError(path + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    ExperimentConfig cfg;
    cfg.design.seed = 0;
    std::string line, section;
    std::size_t lineno = 0;
    bool saw_design = false, saw_method = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                config_fail(path, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "design" && section != "method" && section != "run")
                config_fail(path, lineno, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            config_fail(path, lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            config_fail(path, lineno, "key outside any section");
        try {
            if (section == "design") {
                if (key == "kind") {
                    cfg.design.design = design_from_string(value);
                    saw_design = true;
                } else if (key == "p") {
                    cfg.design.p = std::stoi(value);
                } else if (key == "n") {
                    cfg.design.n = std::stoi(value);
                } else if (key == "dist") {
                    cfg.design.dist = dist_from_string(value);
                } else if (key == "burn_in") {
                    cfg.design.burn_in = std::stoi(value);
                } else {
                    config_fail(path, lineno, "unknown design key '" + key + "'");
                }
            } else if (section == "method") {
                if (key == "name") {
                    cfg.method = method_from_string(value);
                    saw_method = true;
                } else if (key == "h0") {
                    cfg.h0 = std::stoi(value);
                } else if (key == "n_starts") {
                    cfg.n_starts = std::stoi(value);
                } else if (key == "max_iter") {
                    cfg.max_iter = std::stoi(value);
                } else if (key == "tol_obj") {
                    cfg.tol_obj = std::stod(value);
                } else if (key == "c0") {
                    cfg.c0 = std::stod(value);
                } else if (key == "eps_frob") {
                    cfg.eps_frob = std::stod(value);
                } else if (key == "max_outer") {
                    cfg.max_outer = std::stoi(value);
                } else {
                    config_fail(path, lineno, "unknown method key '" + key + "'");
                }
            } else {
                if (key == "replications") {
                    cfg.replications = std::stoi(value);
                } else if (key == "base_seed") {
                    cfg.base_seed = std::stoull(value);
                } else if (key == "workers") {
                    cfg.workers = std::stoi(value);
                } else if (key == "out") {
                    cfg.output_path = value;
                } else if (key == "setting") {
                    cfg.setting_name = value;
                } else {
                    config_fail(path, lineno, "unknown run key '" + key + "'");
                }
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            config_fail(path, lineno, std::string("bad value: ") + e.what());
        }
    }
    if (!saw_design) throw ParseError(path + ": missing [design] kind");
    if (!saw_method) throw ParseError(path + ": missing [method] name");
    if (cfg.setting_name.empty())
        cfg.setting_name = to_string(cfg.design.design) + "-" +
                           to_string(cfg.design.dist) + "-p" +
                           std::to_string(cfg.design.p) + "-n" +
                           std::to_string(cfg.design.n);
    return cfg;
}

}  // namespace mica
