#include "cuelab/gp.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "cuelab/error.hpp"
#include "text.hpp"

namespace cuelab::gp {

void ResponseDataset::append(double prev_cadence, double cue, double next_cadence) {
    if (!std::isfinite(prev_cadence) || !std::isfinite(cue) || !std::isfinite(next_cadence)) {
        throw input_error("gp: non-finite training value");
    }
    if (prev_cadence < 0.0 || cue < 0.0 || next_cadence < 0.0) {
        throw input_error("gp: cadences and cues must be non-negative");
    }
    inputs_.push_back({prev_cadence, cue});
    outputs_.push_back(next_cadence);
}

ResponseDataset ResponseDataset::prefix(std::size_t n) const {
    ResponseDataset out;
    n = std::min(n, size());
    out.inputs_.assign(inputs_.begin(), inputs_.begin() + static_cast<std::ptrdiff_t>(n));
    out.outputs_.assign(outputs_.begin(), outputs_.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

void GpHyperparams::validate() const {
    for (double l : length_scales) {
        if (!(l > 0.0) || !std::isfinite(l)) throw config_error("gp: length scales must be > 0");
    }
    if (!(signal_variance > 0.0)) throw config_error("gp: signal_variance must be > 0");
    if (!(noise_variance > 0.0)) throw config_error("gp: noise_variance must be > 0");
    if (!(jitter >= 0.0)) throw config_error("gp: jitter must be >= 0");
    if (!std::isfinite(basis_coefficient)) throw config_error("gp: basis_coefficient must be finite");
}

double kernel(const ResponseInput& a, const ResponseInput& b, const GpHyperparams& hp) {
    const double d0 = (a.prev_cadence - b.prev_cadence) / hp.length_scales[0];
    const double d1 = (a.cue - b.cue) / hp.length_scales[1];
    return hp.signal_variance * std::exp(-0.5 * (d0 * d0 + d1 * d1));
}

namespace {

Eigen::MatrixXd regularized_gram(const ResponseDataset& data, const GpHyperparams& hp) {
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto& x = data.inputs();
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        gram(i, i) = hp.signal_variance + hp.noise_variance + hp.jitter;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = kernel(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)], hp);
            gram(i, j) = v;
            gram(j, i) = v;
        }
    }
    return gram;
}

Eigen::LLT<Eigen::MatrixXd> factorize(const ResponseDataset& data, const GpHyperparams& hp) {
    if (data.empty()) {
        throw Error(ErrorCode::insufficient_data, "gp: dataset is empty");
    }
    Eigen::LLT<Eigen::MatrixXd> chol(regularized_gram(data, hp));
    if (chol.info() != Eigen::Success) {
        throw numerical_error("gp: regularized kernel matrix is not positive definite");
    }
    const auto& l = chol.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) {
            throw numerical_error("gp: Cholesky factor has a non-positive pivot");
        }
    }
    return chol;
}

Eigen::Map<const Eigen::VectorXd> as_vector(const std::vector<double>& v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

double gls_basis(const Eigen::LLT<Eigen::MatrixXd>& chol, const std::vector<double>& y) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(y.size()));
    const Eigen::VectorXd kinv_ones = chol.solve(ones);
    const double denom = kinv_ones.sum();
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        throw numerical_error("gp: degenerate basis normal equation");
    }
    return kinv_ones.dot(as_vector(y)) / denom;
}

} // namespace

GpPosterior::GpPosterior(ResponseDataset dataset, const GpHyperparams& hp)
    : dataset_(std::move(dataset)), hp_(hp) {
    hp_.validate();
    chol_ = factorize(dataset_, hp_);
    const Eigen::VectorXd centered =
        as_vector(dataset_.outputs()).array() - hp_.basis_coefficient;
    weights_ = chol_.solve(centered);
    if (!weights_.allFinite()) throw numerical_error("gp: non-finite posterior weights");
}

Eigen::VectorXd GpPosterior::cross_kernel(const ResponseInput& query) const {
    const auto& x = dataset_.inputs();
    Eigen::VectorXd k(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) k(static_cast<Eigen::Index>(i)) = kernel(query, x[i], hp_);
    return k;
}

double GpPosterior::mean(const ResponseInput& query) const {
    const auto& x = dataset_.inputs();
    double sum = hp_.basis_coefficient;
    for (std::size_t i = 0; i < x.size(); ++i) sum += weights_(static_cast<Eigen::Index>(i)) * kernel(query, x[i], hp_);
    return sum;
}

double GpPosterior::mean_cue_derivative(const ResponseInput& query) const {
    const auto& x = dataset_.inputs();
    const double inv_l2 = 1.0 / (hp_.length_scales[1] * hp_.length_scales[1]);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum += weights_(static_cast<Eigen::Index>(i)) * kernel(query, x[i], hp_) * (-(query.cue - x[i].cue) * inv_l2);
    }
    return sum;
}

double GpPosterior::raw_variance(const ResponseInput& query) const {
    Eigen::VectorXd v = cross_kernel(query);
    chol_.matrixL().solveInPlace(v);
    return kernel(query, query, hp_) - v.squaredNorm();
}

GpPrediction GpPosterior::predict(const ResponseInput& query) const {
    return {mean(query), std::max(0.0, raw_variance(query))};
}

GpHyperparams fit_basis(const ResponseDataset& dataset, const GpHyperparams& hp) {
    hp.validate();
    const auto chol = factorize(dataset, hp);
    GpHyperparams out = hp;
    out.basis_coefficient = gls_basis(chol, dataset.outputs());
    return out;
}

GpPrediction predict(const ResponseDataset& dataset, const GpHyperparams& hp, const ResponseInput& query) {
    return GpPosterior(dataset, hp).predict(query);
}

double log_marginal_likelihood(const ResponseDataset& dataset, const GpHyperparams& hp) {
    hp.validate();
    const auto chol = factorize(dataset, hp);
    const Eigen::VectorXd r = as_vector(dataset.outputs()).array() - hp.basis_coefficient;
    const Eigen::VectorXd alpha = chol.solve(r);
    const auto& l = chol.matrixLLT();
    double log_det_half = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) log_det_half += std::log(l(i, i));
    const double n = static_cast<double>(dataset.size());
    return -0.5 * r.dot(alpha) - log_det_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

GpHyperparams refit_hyperparams(const ResponseDataset& dataset, const GpHyperparams& start) {
    static constexpr double length_grid[] = {0.1, 0.15, 0.2, 0.3, 0.45, 0.7, 1.0};
    static constexpr double signal_grid[] = {0.01, 0.02, 0.05, 0.1, 0.2};
    static constexpr double noise_grid[] = {0.001, 0.0025, 0.005, 0.01, 0.02};

    GpHyperparams best = fit_basis(dataset, start);
    double best_ll = log_marginal_likelihood(dataset, best);
    for (double l : length_grid) {
        for (double s : signal_grid) {
            for (double noise : noise_grid) {
                GpHyperparams cand = start;
                cand.length_scales = {l, l};
                cand.signal_variance = s;
                cand.noise_variance = noise;
                try {
                    cand = fit_basis(dataset, cand);
                    const double ll = log_marginal_likelihood(dataset, cand);
                    if (ll > best_ll) {
                        best_ll = ll;
                        best = cand;
                    }
                } catch (const Error&) {
                    // skip candidates that fail to factorize
                }
            }
        }
    }
    return best;
}

std::vector<TracePoint> error_variance_trace(const ResponseDataset& dataset, const GpHyperparams& hp) {
    hp.validate();
    std::vector<TracePoint> trace;
    trace.reserve(dataset.size());
    for (std::size_t k = 0; k < dataset.size(); ++k) {
        const auto& query = dataset.inputs()[k];
        const double truth = dataset.outputs()[k];
        GpPrediction pred{hp.basis_coefficient, hp.signal_variance};
        if (k > 0) {
            auto train = dataset.prefix(k);
            const auto fitted = fit_basis(train, hp);
            pred = GpPosterior(std::move(train), fitted).predict(query);
        }
        trace.push_back({k, std::abs(pred.mean - truth), pred.variance});
    }
    return trace;
}

void write_csv(const ResponseDataset& dataset, std::ostream& out) {
    out << "k,prev_cadence_hz,cue_hz,next_cadence_hz\n";
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& x = dataset.inputs()[i];
        out << (i + 1) << ',' << detail::num(x.prev_cadence) << ',' << detail::num(x.cue) << ','
            << detail::num(dataset.outputs()[i]) << '\n';
    }
}

void save_csv(const ResponseDataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    write_csv(dataset, out);
    if (!out) throw io_error("failed writing " + path.string());
}

ResponseDataset read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw input_error("gp csv: empty input");
    const auto header = detail::split_csv_line(line);
    if (header != std::vector<std::string>{"k", "prev_cadence_hz", "cue_hz", "next_cadence_hz"}) {
        throw input_error("gp csv: unexpected header '" + line + "'");
    }
    ResponseDataset data;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 4) throw input_error("gp csv: expected 4 columns in '" + line + "'");
        const auto k = detail::parse_int(f[0], "k");
        if (k != static_cast<long long>(data.size()) + 1) throw input_error("gp csv: increments must be 1..n in order");
        data.append(detail::parse_double(f[1], "prev_cadence_hz"), detail::parse_double(f[2], "cue_hz"),
                    detail::parse_double(f[3], "next_cadence_hz"));
    }
    return data;
}

ResponseDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());
    return read_csv(in);
}

} // namespace cuelab::gp
