#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mica/csv.hpp"
#include "mica/gmica.hpp"
#include "mica/simgen.hpp"

namespace mica {

enum class Method { Mica, MicaSequential, GmicaKnown, GmicaAlg1 };

Method method_from_string(const std::string& s);
std::string to_string(Method m);

/// Declarative Monte Carlo run: design x method x replication count.
/// Replication r draws its data and runs its estimator with seed
/// base_seed + r, so reports are reproducible for any worker count.
struct ExperimentConfig {
    DgpSpec design;          // per-replication seed is filled in by the runner
    Method method = Method::Mica;
    int h0 = 1;
    int replications = 100;
    std::uint64_t base_seed = 0;
    double c0 = 0.75;
    int n_starts = 200;
    int max_iter = 500;
    double tol_obj = 1e-8;
    double eps_frob = 1e-4;
    int max_outer = 10;
    int workers = 0;  // 0 = hardware concurrency
    std::string output_path;
    std::string setting_name;
    bool timing = false;  // record wall-clock (breaks byte-identical reruns)

    void validate() const;
};

struct ReplicationRecord {
    std::uint64_t seed = 0;
    double distance = 0.0;       // scaled D^2 or scaled Dtilde^2
    std::vector<int> groups_found;
    bool correct_segmentation = false;
    double runtime_s = 0.0;
    bool failed = false;
    std::string error;
};

struct ExperimentSummary {
    double mean_distance = 0.0;
    double sd_distance = 0.0;
    double pi = 0.0;
    double total_runtime_s = 0.0;
    int distance_count = 0;  // replications entering the distance statistics
    int failures = 0;
};

struct ExperimentReport {
    std::vector<ReplicationRecord> per_replication;
    ExperimentSummary summary;
};

/// Runs the experiment: per replication, generate -> whiten -> estimate ->
/// score against the whitening-adjusted truth. Distances for the grouped
/// methods are aggregated only over correctly segmented replications; pi is
/// the correct-segmentation fraction over all replications. Throws
/// NumericalError when more than 20% of replications fail.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Summary CSV (header: setting,mean_d2,sd_d2,runtime,pi,replications,used,
/// failures) preceded by '#' comment lines documenting the scoring
/// convention, plus a per-replication CSV at path + ".reps.csv".
void write_report(const ExperimentConfig& cfg, const ExperimentReport& report);

/// Flat key = value config with [section] headers and # comments.
ExperimentConfig parse_experiment_config(const std::string& path);

}  // namespace mica
