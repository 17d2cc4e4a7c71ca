#include "fetx/ann.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fetx/errors.hpp"
#include "fetx/rng.hpp"

namespace fetx {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

MLPWeights zeros_like(const MLPWeights& w) {
    MLPWeights g;
    g.layers.reserve(w.layers.size());
    for (const auto& l : w.layers) {
        g.layers.push_back({MatrixXd::Zero(l.weight.rows(), l.weight.cols()), VectorXd::Zero(l.bias.size())});
    }
    return g;
}

void check_shapes(const MLPWeights& w, const MatrixXd& x) {
    if (w.layers.empty()) throw DataError("network has no layers");
    if (x.rows() != w.layers.front().weight.cols()) throw DataError("input width does not match the network");
}

}  // namespace

double swish(double x) { return x * logistic(x); }

double swish_derivative(double x) {
    const double s = logistic(x);
    return s + x * s * (1.0 - s);
}

std::size_t MLPConfig::hidden_neurons() const {
    if (widths.size() < 2) return 0;
    return std::accumulate(widths.begin() + 1, widths.end() - 1, std::size_t{0});
}

void MLPConfig::validate() const {
    if (widths.size() < 2) throw ConfigError("MLP needs an input and an output width");
    for (auto w : widths) {
        if (w == 0) throw ConfigError("MLP layer widths must be positive");
    }
    if (init != "he-normal") throw ConfigError("unknown init scheme '" + init + "'");
}

void MLPConfig::validate_extractor() const {
    validate();
    if (widths.front() != kNumFeatures || widths.back() != kNumParams) {
        throw ConfigError("extraction network must map 24 features to 14 parameters");
    }
    if (widths.size() != 6) throw ConfigError("extraction network must have exactly 4 hidden layers");
    if (hidden_neurons() != 340) throw ConfigError("hidden layer widths must sum to 340");
}

std::size_t MLPWeights::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

bool MLPWeights::all_finite() const {
    for (const auto& l : layers) {
        if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    }
    return true;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || batch_size == 0 || max_epochs == 0 || patience == 0 || !(beta1 > 0.0) ||
        !(beta2 > 0.0) || !(epsilon > 0.0) || beta1 >= 1.0 || beta2 >= 1.0) {
        throw ConfigError("training hyperparameters must be positive (decay rates below 1)");
    }
    if (patience >= max_epochs) throw ConfigError("patience must be smaller than max_epochs");
    if (!(lr_final_fraction > 0.0) || lr_final_fraction > 1.0) throw ConfigError("lr_final_fraction must be in (0, 1]");
}

double TrainConfig::learning_rate_at(std::size_t epoch) const {
    const double t = static_cast<double>(epoch - 1) / static_cast<double>(max_epochs);
    const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * t));
    return learning_rate * (lr_final_fraction + (1.0 - lr_final_fraction) * cosine);
}

MLPWeights init_weights(const MLPConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    MLPWeights w;
    for (std::size_t l = 0; l + 1 < cfg.widths.size(); ++l) {
        const auto fan_in = static_cast<Eigen::Index>(cfg.widths[l]);
        const auto fan_out = static_cast<Eigen::Index>(cfg.widths[l + 1]);
        const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
        Layer layer{MatrixXd(fan_out, fan_in), VectorXd::Zero(fan_out)};
        for (Eigen::Index r = 0; r < fan_out; ++r) {
            for (Eigen::Index c = 0; c < fan_in; ++c) layer.weight(r, c) = sd * rng.normal();
        }
        w.layers.push_back(std::move(layer));
    }
    return w;
}

MatrixXd forward_batch(const MLPWeights& w, const MatrixXd& x) {
    check_shapes(w, x);
    MatrixXd a = x;
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        MatrixXd z = w.layers[l].weight * a;
        z.colwise() += w.layers[l].bias;
        if (l + 1 < w.layers.size()) z = z.unaryExpr([](double v) { return swish(v); });
        a = std::move(z);
    }
    return a;
}

VectorXd forward(const MLPWeights& w, const VectorXd& x) { return forward_batch(w, x); }

double mse_loss(const MLPWeights& w, const MatrixXd& x, const MatrixXd& y) {
    const MatrixXd out = forward_batch(w, x);
    if (out.rows() != y.rows() || out.cols() != y.cols()) throw DataError("target shape does not match the network");
    return (out - y).squaredNorm() / static_cast<double>(y.size());
}

LossAndGrad loss_and_grad(const MLPWeights& w, const MatrixXd& x, const MatrixXd& y) {
    check_shapes(w, x);
    const std::size_t depth = w.layers.size();

    // act[l] feeds layer l; slope[l] holds swish'(z) of hidden layer l
    std::vector<MatrixXd> act(depth + 1);
    std::vector<MatrixXd> slope(depth);
    act[0] = x;
    for (std::size_t l = 0; l < depth; ++l) {
        MatrixXd z = w.layers[l].weight * act[l];
        z.colwise() += w.layers[l].bias;
        if (l + 1 < depth) {
            const MatrixXd sig = z.unaryExpr([](double v) { return logistic(v); });
            act[l + 1] = z.cwiseProduct(sig);
            slope[l] = sig.array() + act[l + 1].array() * (1.0 - sig.array());
        } else {
            act[l + 1] = std::move(z);
        }
    }
    const MatrixXd& out = act[depth];
    if (out.rows() != y.rows() || out.cols() != y.cols()) throw DataError("target shape does not match the network");

    const double count = static_cast<double>(y.size());
    const MatrixXd resid = out - y;
    LossAndGrad res;
    res.loss = resid.squaredNorm() / count;
    if (!std::isfinite(res.loss)) throw TrainingError("non-finite loss");

    res.grad = zeros_like(w);
    MatrixXd delta = (2.0 / count) * resid;
    for (std::size_t l = depth; l-- > 0;) {
        res.grad.layers[l].weight.noalias() = delta * act[l].transpose();
        res.grad.layers[l].bias = delta.rowwise().sum();
        if (l > 0) {
            MatrixXd back = w.layers[l].weight.transpose() * delta;
            delta = back.cwiseProduct(slope[l - 1]);
        }
    }
    return res;
}

MatrixXd feature_matrix(const Dataset& ds, const Normalizer& norm, std::span<const std::size_t> rows) {
    MatrixXd m(static_cast<Eigen::Index>(kNumFeatures), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t c = 0; c < rows.size(); ++c) {
        const auto z = norm.normalize(ds.X[rows[c]]);
        for (std::size_t j = 0; j < kNumFeatures; ++j) m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = z[j];
    }
    return m;
}

MatrixXd target_matrix(const Dataset& ds, const Normalizer& norm, std::span<const std::size_t> rows) {
    MatrixXd m(static_cast<Eigen::Index>(kNumParams), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t c = 0; c < rows.size(); ++c) {
        const auto u = norm.normalize(ds.Y[rows[c]]);
        for (std::size_t j = 0; j < kNumParams; ++j) m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = u[j];
    }
    return m;
}

TrainResult train(const Dataset& ds, const Normalizer& norm, const MLPConfig& mcfg, const TrainConfig& tcfg,
                  const EpochCallback& on_epoch) {
    mcfg.validate();
    tcfg.validate();
    if (mcfg.widths.front() != kNumFeatures || mcfg.widths.back() != kNumParams) {
        throw ConfigError("network must map 24 features to 14 parameters");
    }
    const auto train_rows = ds.indices(Split::Train);
    const auto val_rows = ds.indices(Split::Val);
    if (train_rows.empty() || val_rows.empty()) throw ConfigError("training needs non-empty train and val splits");

    const MatrixXd xtr = feature_matrix(ds, norm, train_rows);
    const MatrixXd ytr = target_matrix(ds, norm, train_rows);
    const MatrixXd xval = feature_matrix(ds, norm, val_rows);
    const MatrixXd yval = target_matrix(ds, norm, val_rows);

    TrainResult result;
    MLPWeights w = init_weights(mcfg);
    MLPWeights m1 = zeros_like(w);
    MLPWeights m2 = zeros_like(w);
    result.weights = w;
    result.best_val_loss = std::numeric_limits<double>::infinity();

    const auto n = static_cast<std::size_t>(xtr.cols());
    const std::size_t bs = std::min(tcfg.batch_size, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    MatrixXd xb, yb;
    double b1t = 1.0, b2t = 1.0;
    const auto t0 = std::chrono::steady_clock::now();

    for (std::size_t epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
        Rng rng(derive_seed(tcfg.seed, epoch));
        const double lr = tcfg.learning_rate_at(epoch);
        for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += bs) {
            const std::size_t cnt = std::min(bs, n - start);
            xb.resize(xtr.rows(), static_cast<Eigen::Index>(cnt));
            yb.resize(ytr.rows(), static_cast<Eigen::Index>(cnt));
            for (std::size_t k = 0; k < cnt; ++k) {
                xb.col(static_cast<Eigen::Index>(k)) = xtr.col(static_cast<Eigen::Index>(order[start + k]));
                yb.col(static_cast<Eigen::Index>(k)) = ytr.col(static_cast<Eigen::Index>(order[start + k]));
            }
            const auto lg = loss_and_grad(w, xb, yb);
            loss_sum += lg.loss * static_cast<double>(cnt);

            b1t *= tcfg.beta1;
            b2t *= tcfg.beta2;
            const double step = lr * std::sqrt(1.0 - b2t) / (1.0 - b1t);
            const double eps_hat = tcfg.epsilon * std::sqrt(1.0 - b2t);
            auto update = [&](auto& param, auto& mom1, auto& mom2, const auto& g) {
                mom1 = tcfg.beta1 * mom1 + (1.0 - tcfg.beta1) * g;
                mom2 = tcfg.beta2 * mom2 + (1.0 - tcfg.beta2) * g.cwiseProduct(g);
                param.array() -= step * mom1.array() / (mom2.array().sqrt() + eps_hat);
            };
            for (std::size_t l = 0; l < w.layers.size(); ++l) {
                update(w.layers[l].weight, m1.layers[l].weight, m2.layers[l].weight, lg.grad.layers[l].weight);
                update(w.layers[l].bias, m1.layers[l].bias, m2.layers[l].bias, lg.grad.layers[l].bias);
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(n);
        rec.val_loss = mse_loss(w, xval, yval);
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!std::isfinite(rec.val_loss) || !std::isfinite(rec.train_loss)) {
            throw TrainingError("training diverged at epoch " + std::to_string(epoch));
        }
        result.history.push_back(rec);
        if (on_epoch) on_epoch(rec);

        if (rec.val_loss < result.best_val_loss) {
            result.best_val_loss = rec.val_loss;
            result.best_epoch = epoch;
            result.weights = w;
        } else if (epoch - result.best_epoch >= tcfg.patience) {
            break;
        }
    }
    return result;
}

ModelParams predict_params(const MLPWeights& w, const Normalizer& norm, const FeatureVector& fv) {
    for (double v : fv.values) {
        if (!std::isfinite(v)) throw DataError("feature vector contains non-finite values");
    }
    const auto z = norm.normalize(fv);
    const VectorXd out = forward(w, Eigen::Map<const VectorXd>(z.data(), static_cast<Eigen::Index>(z.size())));
    if (out.size() != static_cast<Eigen::Index>(kNumParams)) throw DataError("network does not produce 14 outputs");
    std::array<double, kNumParams> u{};
    for (std::size_t i = 0; i < kNumParams; ++i) u[i] = std::clamp(out(static_cast<Eigen::Index>(i)), 0.0, 1.0);
    ModelParams p = norm.ranges.clip(norm.denormalize_params(u));
    if (p.cggmin + kCggMargin > p.cggmax) p.cggmin = std::max(p.cggmax - kCggMargin, norm.ranges.bounds[11].lo);
    return p;
}

namespace {

using nlohmann::json;

json to_json(const std::vector<double>& v) { return json(v); }

std::vector<double> doubles(const json& j, std::size_t expected, const char* what) {
    auto v = j.get<std::vector<double>>();
    if (v.size() != expected) throw DataError(std::string("model file: wrong length for ") + what);
    return v;
}

}  // namespace

std::string model_to_string(const ExtractorModel& m) {
    json doc;
    doc["format"] = "fetx-extractor";
    doc["version"] = kModelFormatVersion;
    doc["mlp"] = {{"widths", m.config.widths},
                  {"hidden_activation", "swish"},
                  {"output_activation", "identity"},
                  {"init", m.config.init},
                  {"seed", m.config.seed}};
    json ranges = json::array();
    for (std::size_t i = 0; i < kNumParams; ++i) {
        const auto& b = m.normalizer.ranges.bounds[i];
        ranges.push_back({{"name", kParamNames[i]},
                          {"lo", b.lo},
                          {"hi", b.hi},
                          {"law", b.law == SamplingLaw::LogUniform ? "log-uniform" : "uniform"}});
    }
    std::vector<std::string> fnames(kFeatureNames.begin(), kFeatureNames.end());
    doc["normalizer"] = {{"features", fnames},
                         {"mean", std::vector<double>(m.normalizer.mean.begin(), m.normalizer.mean.end())},
                         {"stddev", std::vector<double>(m.normalizer.stddev.begin(), m.normalizer.stddev.end())},
                         {"log10", std::vector<bool>(m.normalizer.log_scale.begin(), m.normalizer.log_scale.end())},
                         {"param_ranges", ranges}};
    doc["feature_config"] = {{"i_crit", m.features.i_crit}, {"ss_lo", m.features.ss_lo}, {"ss_hi", m.features.ss_hi}};
    json layers = json::array();
    for (const auto& l : m.weights.layers) {
        std::vector<double> wv;
        wv.reserve(static_cast<std::size_t>(l.weight.size()));
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) wv.push_back(l.weight(r, c));
        }
        layers.push_back({{"rows", l.weight.rows()},
                          {"cols", l.weight.cols()},
                          {"weight", to_json(wv)},
                          {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
    }
    doc["layers"] = layers;
    return doc.dump(1) + "\n";
}

ExtractorModel model_from_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "fetx-extractor") throw DataError("model file: unknown format");
        if (doc.at("version").get<int>() != kModelFormatVersion) {
            throw DataError("model file: unsupported version " + doc.at("version").dump());
        }
        ExtractorModel m;
        const auto& mlp = doc.at("mlp");
        m.config.widths = mlp.at("widths").get<std::vector<std::size_t>>();
        m.config.init = mlp.at("init").get<std::string>();
        m.config.seed = mlp.at("seed").get<std::uint64_t>();
        if (mlp.at("hidden_activation") != "swish" || mlp.at("output_activation") != "identity") {
            throw DataError("model file: unsupported activation");
        }
        m.config.validate();

        const auto& nz = doc.at("normalizer");
        const auto names = nz.at("features").get<std::vector<std::string>>();
        if (!std::equal(names.begin(), names.end(), kFeatureNames.begin(), kFeatureNames.end())) {
            throw DataError("model file: feature order mismatch");
        }
        const auto mean = doubles(nz.at("mean"), kNumFeatures, "mean");
        const auto sd = doubles(nz.at("stddev"), kNumFeatures, "stddev");
        std::copy(mean.begin(), mean.end(), m.normalizer.mean.begin());
        std::copy(sd.begin(), sd.end(), m.normalizer.stddev.begin());
        const auto logs = nz.at("log10").get<std::vector<bool>>();
        if (logs.size() != kNumFeatures) throw DataError("model file: wrong length for log10");
        std::copy(logs.begin(), logs.end(), m.normalizer.log_scale.begin());
        for (double v : sd) {
            if (!(v > 0.0)) throw DataError("model file: stddev must be positive");
        }
        const auto& ranges = nz.at("param_ranges");
        if (ranges.size() != kNumParams) throw DataError("model file: expected 14 parameter ranges");
        for (std::size_t i = 0; i < kNumParams; ++i) {
            const auto& r = ranges.at(i);
            if (r.at("name").get<std::string>() != kParamNames[i]) throw DataError("model file: parameter order mismatch");
            const auto law = r.at("law").get<std::string>();
            if (law != "uniform" && law != "log-uniform") throw DataError("model file: unknown sampling law");
            m.normalizer.ranges.bounds[i] = {r.at("lo").get<double>(), r.at("hi").get<double>(),
                                             law == "uniform" ? SamplingLaw::Uniform : SamplingLaw::LogUniform};
        }
        m.normalizer.ranges.validate();

        const auto& fc = doc.at("feature_config");
        m.features = {fc.at("i_crit").get<double>(), fc.at("ss_lo").get<double>(), fc.at("ss_hi").get<double>()};
        m.features.validate();

        const auto& layers = doc.at("layers");
        if (layers.size() + 1 != m.config.widths.size()) throw DataError("model file: layer count mismatch");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& jl = layers.at(l);
            const auto rows = jl.at("rows").get<std::size_t>();
            const auto cols = jl.at("cols").get<std::size_t>();
            if (rows != m.config.widths[l + 1] || cols != m.config.widths[l]) {
                throw DataError("model file: layer shape mismatch");
            }
            const auto wv = doubles(jl.at("weight"), rows * cols, "weight");
            const auto bv = doubles(jl.at("bias"), rows, "bias");
            Layer layer{MatrixXd(rows, cols), VectorXd(rows)};
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < cols; ++c) {
                    layer.weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = wv[r * cols + c];
                }
                layer.bias(static_cast<Eigen::Index>(r)) = bv[r];
            }
            m.weights.layers.push_back(std::move(layer));
        }
        if (!m.weights.all_finite()) throw DataError("model file: non-finite weights");
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const ExtractorModel& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path.string());
    os << model_to_string(m);
    if (!os) throw DataError("error writing " + path.string());
}

ExtractorModel load_model(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot read " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return model_from_string(ss.str());
}

}  // namespace fetx
