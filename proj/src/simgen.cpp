#include "mica/simgen.hpp"

#include <cmath>

#include "mica/rng.hpp"

namespace mica {

Dist dist_from_string(const std::string& s) {
    if (s == "normal") return Dist::Normal;
    if (s == "t" || s == "t3") return Dist::StudentT3;
    if (s == "exp" || s == "exponential") return Dist::Exponential;
    throw std::invalid_argument("unknown distribution: " + s);
}

Design design_from_string(const std::string& s) {
    if (s == "mica-ex1") return Design::MicaEx1;
    if (s == "mica-ex2") return Design::MicaEx2;
    if (s == "gmica-ex1") return Design::GmicaEx1;
    if (s == "gmica-ex2") return Design::GmicaEx2;
    throw std::invalid_argument("unknown design: " + s);
}

std::string to_string(Dist d) {
    switch (d) {
        case Dist::Normal: return "normal";
        case Dist::StudentT3: return "t";
        case Dist::Exponential: return "exp";
    }
    return "?";
}

std::string to_string(Design d) {
    switch (d) {
        case Design::MicaEx1: return "mica-ex1";
        case Design::MicaEx2: return "mica-ex2";
        case Design::GmicaEx1: return "gmica-ex1";
        case Design::GmicaEx2: return "gmica-ex2";
    }
    return "?";
}

void DgpSpec::validate() const {
    if (p < 1) throw std::invalid_argument("DgpSpec: p must be >= 1");
    if (n < 2) throw std::invalid_argument("DgpSpec: n must be >= 2");
    if (burn_in < 0) throw std::invalid_argument("DgpSpec: negative burn-in");
    if ((design == Design::GmicaEx1 || design == Design::GmicaEx2) &&
        p % 6 != 0)
        throw std::invalid_argument("DgpSpec: gmica designs need p divisible by 6");
    if (design == Design::MicaEx2 && dist == Dist::Normal)
        throw std::invalid_argument(
            "DgpSpec: the all-pass design excludes normal innovations "
            "(components would be independent over time)");
}

namespace {

double draw(Rng& rng, Dist d) {
    switch (d) {
        case Dist::Normal: return rng.normal();
        case Dist::StudentT3: return rng.student_t3();
        case Dist::Exponential: return rng.exponential_centered();
    }
    return 0.0;
}

void scale_columns_to_unit_sd(Matrix& x) {
    const double n = static_cast<double>(x.rows());
    for (Index c = 0; c < x.cols(); ++c) {
        const double mean = x.col(c).mean();
        const double sd =
            std::sqrt((x.col(c).array() - mean).square().sum() / n);
        if (sd > 0.0) x.col(c) /= sd;
    }
}

GeneratedData assemble(const DgpSpec& spec, Matrix x, OrthoMatrix a,
                       GroupStructure groups) {
    scale_columns_to_unit_sd(x);
    Matrix y = x * a.mat().transpose();
    const WhitenResult wr = whiten(y);
    OrthoMatrix b = adjusted_truth(a, x, groups, wr.transform);
    return GeneratedData{std::move(y), std::move(a), std::move(x),
                         std::move(groups), std::move(b)};
}

}  // namespace

GeneratedData gen_mica_ex1(const DgpSpec& spec) {
    spec.validate();
    if (spec.design != Design::MicaEx1)
        throw std::invalid_argument("gen_mica_ex1: wrong design tag");
    Rng rng(spec.seed);
    std::vector<double> phi(static_cast<std::size_t>(spec.p));
    for (auto& f : phi)
        f = spec.phi_override.value_or(rng.uniform(0.5, 0.9));
    OrthoMatrix a = haar_random(spec.p, rng);
    Matrix x(spec.n, spec.p);
    for (int i = 0; i < spec.p; ++i) {
        double v = 0.0;
        for (int t = 0; t < spec.burn_in + spec.n; ++t) {
            v = phi[static_cast<std::size_t>(i)] * v + draw(rng, spec.dist);
            if (t >= spec.burn_in) x(t - spec.burn_in, i) = v;
        }
    }
    return assemble(spec, std::move(x), std::move(a),
                    GroupStructure::singletons(spec.p));
}

GeneratedData gen_mica_ex2(const DgpSpec& spec) {
    spec.validate();
    if (spec.design != Design::MicaEx2)
        throw std::invalid_argument("gen_mica_ex2: wrong design tag");
    Rng rng(spec.seed);
    std::vector<double> phi(static_cast<std::size_t>(spec.p));
    for (auto& f : phi)
        f = spec.phi_override.value_or(rng.uniform(0.5, 0.9));
    OrthoMatrix a = haar_random(spec.p, rng);
    Matrix x(spec.n, spec.p);
    for (int i = 0; i < spec.p; ++i) {
        const double f = phi[static_cast<std::size_t>(i)];
        double v = 0.0;
        double eps_prev = draw(rng, spec.dist);
        for (int t = 0; t < spec.burn_in + spec.n; ++t) {
            const double eps = draw(rng, spec.dist);
            v = f * v - eps_prev / f + eps;
            eps_prev = eps;
            if (t >= spec.burn_in) x(t - spec.burn_in, i) = v;
        }
    }
    return assemble(spec, std::move(x), std::move(a),
                    GroupStructure::singletons(spec.p));
}

GeneratedData gen_gmica(const DgpSpec& spec) {
    spec.validate();
    if (spec.design != Design::GmicaEx1 && spec.design != Design::GmicaEx2)
        throw std::invalid_argument("gen_gmica: wrong design tag");
    Rng rng(spec.seed);
    OrthoMatrix a = haar_random(spec.p, rng);

    const int s1 = spec.p / 2, s2 = spec.p / 3, s3 = spec.p / 6;
    const int max_shift = std::max({s1, s2, s3}) - 1;
    const int len = spec.burn_in + spec.n + max_shift;

    std::vector<std::vector<double>> z(3);
    if (spec.design == Design::GmicaEx1) {
        // ARMA(2, q) recursions, one coefficient set per base series.
        const double ar[3][2] = {{0.5, 0.3}, {0.8, -0.5}, {-0.7, -0.5}};
        const std::vector<std::vector<double>> ma = {
            {-0.9, 0.3, 1.2, 1.3}, {1.0, 0.8, 1.8}, {-1.0, -0.8}};
        for (int s = 0; s < 3; ++s) {
            std::vector<double>& zs = z[static_cast<std::size_t>(s)];
            zs.assign(static_cast<std::size_t>(len), 0.0);
            const auto& mas = ma[static_cast<std::size_t>(s)];
            std::vector<double> eps(mas.size() + 1, 0.0);
            double z1 = 0.0, z2 = 0.0;
            for (int t = 0; t < len; ++t) {
                for (std::size_t k = eps.size() - 1; k > 0; --k)
                    eps[k] = eps[k - 1];
                eps[0] = draw(rng, spec.dist);
                double v = ar[s][0] * z1 + ar[s][1] * z2 + eps[0];
                for (std::size_t k = 0; k < mas.size(); ++k)
                    v += mas[k] * eps[k + 1];
                z2 = z1;
                z1 = v;
                zs[static_cast<std::size_t>(t)] = v;
            }
        }
    } else {
        const double phi[3] = {0.9, 0.5, 0.1};
        for (int s = 0; s < 3; ++s) {
            std::vector<double>& zs = z[static_cast<std::size_t>(s)];
            zs.assign(static_cast<std::size_t>(len), 0.0);
            double v = 0.0;
            double eps_prev = draw(rng, spec.dist);
            for (int t = 0; t < len; ++t) {
                const double eps = draw(rng, spec.dist);
                v = phi[s] * v - eps_prev / phi[s] + eps;
                eps_prev = eps;
                zs[static_cast<std::size_t>(t)] = v;
            }
        }
    }

    Matrix x(spec.n, spec.p);
    GroupStructure groups = GroupStructure::contiguous({s1, s2, s3});
    for (int c = 0; c < spec.p; ++c) {
        int series, shift;
        if (c < s1) {
            series = 0;
            shift = c;
        } else if (c < s1 + s2) {
            series = 1;
            shift = c - s1;
        } else {
            series = 2;
            shift = c - s1 - s2;
        }
        for (int t = 0; t < spec.n; ++t)
            x(t, c) = z[static_cast<std::size_t>(series)]
                       [static_cast<std::size_t>(spec.burn_in + t + shift)];
    }
    return assemble(spec, std::move(x), std::move(a), std::move(groups));
}

GeneratedData generate(const DgpSpec& spec) {
    switch (spec.design) {
        case Design::MicaEx1: return gen_mica_ex1(spec);
        case Design::MicaEx2: return gen_mica_ex2(spec);
        case Design::GmicaEx1:
        case Design::GmicaEx2: return gen_gmica(spec);
    }
    throw std::invalid_argument("generate: unknown design");
}

WhitenResult whiten(const Matrix& y) {
    if (y.rows() < 2) throw std::invalid_argument("whiten: need n >= 2");
    detail::require_finite(y, "whiten input");
    const Index n = y.rows();
    Matrix centered = y.rowwise() - y.colwise().mean();
    const Matrix cov =
        centered.transpose() * centered / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    if (es.info() != Eigen::Success)
        throw NumericalError("whiten: eigendecomposition failed");
    if (es.eigenvalues().minCoeff() <= 1e-10)
        throw NumericalError("whiten: sample covariance is rank deficient");
    const Matrix transform = es.eigenvectors() *
                             es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                             es.eigenvectors().transpose();
    return WhitenResult{centered * transform, transform};
}

OrthoMatrix adjusted_truth(const OrthoMatrix& a_true, const Matrix& x_true,
                           const GroupStructure& groups,
                           const Matrix& transform) {
    const Index p = a_true.dim();
    groups.validate(p);
    if (x_true.cols() != p || transform.rows() != p || transform.cols() != p)
        throw std::invalid_argument("adjusted_truth: shape mismatch");
    const Index n = x_true.rows();
    Matrix centered = x_true.rowwise() - x_true.colwise().mean();
    Matrix cov = centered.transpose() * centered / static_cast<double>(n);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j)
            if (groups.assignment[static_cast<std::size_t>(i)] !=
                groups.assignment[static_cast<std::size_t>(j)])
                cov(i, j) = 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 1e-10)
        throw NumericalError("adjusted_truth: component covariance rank deficient");
    const Matrix half = es.eigenvectors() *
                        es.eigenvalues().cwiseSqrt().asDiagonal() *
                        es.eigenvectors().transpose();
    const Matrix b0 = transform * a_true.mat() * half;
    return OrthoMatrix::from(detail::reorthonormalize(b0));
}

}  // namespace mica
