#pragma once

// Gaussian-process model of next cadence as a function of
// (previous cadence, cue frequency). Squared-exponential kernel plus an
// explicit constant basis whose coefficient is fitted by generalized least
// squares. A cue of 0 Hz means no cue was playing.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace cuelab::gp {

struct ResponseInput {
    double prev_cadence = 0.0; // Hz
    double cue = 0.0;          // Hz, 0 = silence

    bool operator==(const ResponseInput&) const = default;
};

class ResponseDataset {
public:
    /// Throws cuelab::Error(input) on negative or non-finite values.
    void append(double prev_cadence, double cue, double next_cadence);

    std::size_t size() const { return outputs_.size(); }
    bool empty() const { return outputs_.empty(); }
    const std::vector<ResponseInput>& inputs() const { return inputs_; }
    const std::vector<double>& outputs() const { return outputs_; }

    /// First n points, in insertion order.
    ResponseDataset prefix(std::size_t n) const;

    bool operator==(const ResponseDataset&) const = default;

private:
    std::vector<ResponseInput> inputs_;
    std::vector<double> outputs_;
};

struct GpHyperparams {
    std::array<double, 2> length_scales{0.3, 0.3}; // Hz, per input dimension
    double signal_variance = 0.05;                 // Hz^2
    double noise_variance = 0.005;                 // Hz^2
    double basis_coefficient = 0.0;                // Hz
    double jitter = 1e-8;

    void validate() const;
};

struct GpPrediction {
    double mean = 0.0;     // Hz
    double variance = 0.0; // Hz^2
};

double kernel(const ResponseInput& a, const ResponseInput& b, const GpHyperparams& hp);

/// Factorized posterior over a frozen copy of the dataset. Construction costs
/// one Cholesky factorization; predictions are O(n) for the mean and O(n^2)
/// for the variance.
class GpPosterior {
public:
    /// Throws cuelab::Error(insufficient_data) on an empty dataset and
    /// cuelab::Error(numerical) when the regularized kernel matrix is not
    /// positive definite.
    GpPosterior(ResponseDataset dataset, const GpHyperparams& hp);

    GpPrediction predict(const ResponseInput& query) const;
    double mean(const ResponseInput& query) const;
    /// d(mean)/d(cue) at the query.
    double mean_cue_derivative(const ResponseInput& query) const;

    const ResponseDataset& dataset() const { return dataset_; }
    const GpHyperparams& hyperparams() const { return hp_; }

    /// Variance computed before clamping at zero; exposed for diagnostics.
    double raw_variance(const ResponseInput& query) const;

private:
    Eigen::VectorXd cross_kernel(const ResponseInput& query) const;

    ResponseDataset dataset_;
    GpHyperparams hp_;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd weights_; // (K + s2 I)^-1 (Y - H beta)
};

/// GLS estimate of the constant basis coefficient under the current kernel.
GpHyperparams fit_basis(const ResponseDataset& dataset, const GpHyperparams& hp);

/// One-shot posterior prediction (factorizes on every call).
GpPrediction predict(const ResponseDataset& dataset, const GpHyperparams& hp,
                     const ResponseInput& query);

/// Log marginal likelihood of the outputs with beta taken from hp.
double log_marginal_likelihood(const ResponseDataset& dataset, const GpHyperparams& hp);

/// Coarse log-grid search over length scale, signal and noise variance
/// maximizing the marginal likelihood (basis refitted at each candidate).
GpHyperparams refit_hyperparams(const ResponseDataset& dataset, const GpHyperparams& start);

struct TracePoint {
    std::size_t increment = 0; // training points available when predicting
    double abs_error = 0.0;    // Hz
    double variance = 0.0;     // Hz^2
};

/// One-step-ahead replay: for each k in [0, n), train on the first k points
/// (basis refitted; at k = 0 the prediction is the prior, i.e. the
/// caller's basis and signal_variance) and predict the k-th realized input.
std::vector<TracePoint> error_variance_trace(const ResponseDataset& dataset, const GpHyperparams& hp);

// CSV with header k,prev_cadence_hz,cue_hz,next_cadence_hz
void write_csv(const ResponseDataset& dataset, std::ostream& out);
void save_csv(const ResponseDataset& dataset, const std::filesystem::path& path);
ResponseDataset read_csv(std::istream& in);
ResponseDataset load_csv(const std::filesystem::path& path);

} // namespace cuelab::gp
