#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fetx/dataset.hpp"
#include "fetx/features.hpp"
#include "fetx/model_params.hpp"

namespace fetx {

/// Fully connected regressor layout. Hidden layers use swish, the output
/// layer is linear.
struct MLPConfig {
    std::vector<std::size_t> widths{kNumFeatures, 128, 96, 72, 44, kNumParams};
    std::string init = "he-normal";
    std::uint64_t seed = 1;

    std::size_t hidden_neurons() const;
    /// At least one layer, all widths positive, known init scheme.
    void validate() const;
    /// validate() plus the extraction network shape: 24 inputs, 14 outputs,
    /// four hidden layers totalling 340 neurons.
    void validate_extractor() const;
};

struct Layer {
    Eigen::MatrixXd weight;  // fan_out x fan_in
    Eigen::VectorXd bias;    // fan_out
};

struct MLPWeights {
    std::vector<Layer> layers;

    std::size_t parameter_count() const;
    bool all_finite() const;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    /// Cosine annealing from learning_rate down to learning_rate * lr_final_fraction
    /// at max_epochs. 1 disables the schedule.
    double lr_final_fraction = 1e-3;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 400;
    std::size_t patience = 40;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 7;

    void validate() const;
    /// `epoch` is 1-based.
    double learning_rate_at(std::size_t epoch) const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double wall_seconds = 0.0;
};

struct TrainResult {
    MLPWeights weights;            // checkpoint with the lowest validation loss
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;
    bool deterministic = true;     // single-threaded training
};

double swish(double x);
double swish_derivative(double x);

/// Zero biases, N(0, 2/fan_in) weights, deterministic in cfg.seed.
MLPWeights init_weights(const MLPConfig& cfg);

/// Single sample.
Eigen::VectorXd forward(const MLPWeights& w, const Eigen::VectorXd& x);
/// Column-per-sample batch.
Eigen::MatrixXd forward_batch(const MLPWeights& w, const Eigen::MatrixXd& x);

struct LossAndGrad {
    double loss = 0.0;
    MLPWeights grad;
};

/// Mean squared error over all outputs and samples, and its gradient with
/// respect to every weight and bias (reverse mode). Columns are samples.
LossAndGrad loss_and_grad(const MLPWeights& w, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Mean squared error only.
double mse_loss(const MLPWeights& w, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Normalized design matrices for the rows in `rows` (columns are samples).
Eigen::MatrixXd feature_matrix(const Dataset& ds, const Normalizer& norm, std::span<const std::size_t> rows);
Eigen::MatrixXd target_matrix(const Dataset& ds, const Normalizer& norm, std::span<const std::size_t> rows);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam on the training split with early stopping on the
/// validation split. Throws TrainingError when a loss becomes non-finite.
TrainResult train(const Dataset& ds, const Normalizer& norm, const MLPConfig& mcfg, const TrainConfig& tcfg,
                  const EpochCallback& on_epoch = {});

/// Network plus everything needed to apply it to raw curves.
struct ExtractorModel {
    MLPConfig config;
    MLPWeights weights;
    Normalizer normalizer;
    FeatureConfig features;
};

/// Denormalized prediction clipped into the normalizer's ranges, with
/// CGGMIN lowered when it would sit within 0.1 fF of CGGMAX.
ModelParams predict_params(const MLPWeights& w, const Normalizer& norm, const FeatureVector& fv);
inline ModelParams predict_params(const ExtractorModel& m, const FeatureVector& fv) {
    return predict_params(m.weights, m.normalizer, fv);
}

inline constexpr int kModelFormatVersion = 1;

void save_model(const std::filesystem::path& path, const ExtractorModel& m);
ExtractorModel load_model(const std::filesystem::path& path);
std::string model_to_string(const ExtractorModel& m);
ExtractorModel model_from_string(const std::string& text);

}  // namespace fetx
