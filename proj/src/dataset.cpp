#include "fetx/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "fetx/curve_io.hpp"
#include "fetx/device_model.hpp"
#include "fetx/errors.hpp"

namespace fetx {

namespace {

constexpr int kMaxRejections = 100;
constexpr std::uint64_t kSplitStream = 0xffffffffffffffffULL;

std::string describe(const ModelParams& p) {
    std::string s = "{";
    const auto v = p.values();
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (i) s += ", ";
        s += std::string(kParamNames[i]) + "=" + format_double(v[i]);
    }
    return s + "}";
}

std::string ranges_to_string(const ParamRanges& r) {
    std::string s;
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (i) s += ';';
        const auto& b = r.bounds[i];
        s += std::string(kParamNames[i]) + ':' + format_double(b.lo) + ':' + format_double(b.hi) + ':' +
             (b.law == SamplingLaw::LogUniform ? "log" : "uniform");
    }
    return s;
}

ParamRanges ranges_from_string(const std::string& s) {
    ParamRanges r = ParamRanges::defaults();
    std::stringstream ss(s);
    std::string item;
    std::size_t count = 0;
    while (std::getline(ss, item, ';')) {
        std::stringstream fs(item);
        std::string name, lo, hi, law;
        if (!std::getline(fs, name, ':') || !std::getline(fs, lo, ':') || !std::getline(fs, hi, ':') ||
            !std::getline(fs, law)) {
            throw DataError("dataset meta: malformed range '" + item + "'");
        }
        const auto idx = param_index(name);
        if (idx != count) throw DataError("dataset meta: ranges out of order at '" + name + "'");
        if (law != "log" && law != "uniform") throw DataError("dataset meta: unknown sampling law '" + law + "'");
        r.bounds[idx] = {parse_double(lo), parse_double(hi), law == "log" ? SamplingLaw::LogUniform : SamplingLaw::Uniform};
        ++count;
    }
    if (count != kNumParams) throw DataError("dataset meta: expected 14 ranges");
    return r;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string header_line() {
    std::string h;
    for (auto n : kFeatureNames) h += std::string(n) + ',';
    for (auto n : kParamNames) h += std::string(n) + ',';
    return h + "split";
}

}  // namespace

std::string_view to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

ModelParams sample_params(const ParamRanges& ranges, Rng& rng) {
    ranges.validate();
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
        std::array<double, kNumParams> v{};
        for (std::size_t i = 0; i < kNumParams; ++i) {
            const auto& r = ranges.bounds[i];
            if (r.law == SamplingLaw::LogUniform) {
                v[i] = std::pow(10.0, rng.uniform(std::log10(r.lo), std::log10(r.hi)));
            } else {
                v[i] = rng.uniform(r.lo, r.hi);
            }
            v[i] = std::clamp(v[i], r.lo, r.hi);
        }
        auto p = ModelParams::from_values(v);
        if (p.cggmin + kCggMargin <= p.cggmax) return p;
    }
    throw ConfigError("parameter ranges cannot satisfy CGGMIN + 0.1 fF <= CGGMAX");
}

std::vector<std::size_t> Dataset::indices(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split.size(); ++i) {
        if (split[i] == s) out.push_back(i);
    }
    return out;
}

Dataset build_dataset(std::size_t n, std::uint64_t seed, const ParamRanges& ranges, const FeatureConfig& cfg,
                      unsigned threads) {
    if (n < 100) throw ConfigError("dataset size must be at least 100");
    ranges.validate();
    cfg.validate();

    Dataset ds;
    ds.seed = seed;
    ds.ranges = ranges;
    ds.features = cfg;
    ds.X.resize(n);
    ds.Y.resize(n);

    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::size_t err_index = n;
    std::exception_ptr err;

    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            Rng rng(derive_seed(seed, i));
            ModelParams p;
            try {
                p = sample_params(ranges, rng);
                ds.Y[i] = p;
                ds.X[i] = featurize(simulate_curveset(p), cfg);
            } catch (const std::exception& e) {
                std::lock_guard lock(err_mu);
                if (i < err_index) {
                    err_index = i;
                    err = std::make_exception_ptr(
                        DataError("sample " + std::to_string(i) + " failed (" + e.what() + ") params=" + describe(p)));
                }
            }
        }
    };

    threads = std::max(1u, threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (err) std::rethrow_exception(err);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(derive_seed(seed, kSplitStream));
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);

    const std::size_t n_train = n * 8 / 10;
    const std::size_t n_val = n / 10;
    ds.split.assign(n, Split::Test);
    for (std::size_t k = 0; k < n; ++k) {
        ds.split[perm[k]] = k < n_train ? Split::Train : (k < n_train + n_val ? Split::Val : Split::Test);
    }
    return ds;
}

void write_dataset_csv(std::ostream& os, const Dataset& ds) {
    os << "# meta seed=" << ds.seed << ", n=" << ds.size() << ", rng=" << kRngAlgorithm
       << ", i_crit=" << format_double(ds.features.i_crit) << ", ss_lo=" << format_double(ds.features.ss_lo)
       << ", ss_hi=" << format_double(ds.features.ss_hi) << ", ranges=" << ranges_to_string(ds.ranges) << '\n';
    os << header_line() << '\n';
    std::string line;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        line.clear();
        for (double v : ds.X[i].values) line += format_double(v) + ',';
        for (double v : ds.Y[i].values()) line += format_double(v) + ',';
        line += to_string(ds.split[i]);
        os << line << '\n';
    }
}

Dataset read_dataset_csv(std::istream& is) {
    Dataset ds;
    std::string line;
    if (!std::getline(is, line) || line.rfind("# meta ", 0) != 0) throw DataError("dataset: missing '# meta' line");

    std::size_t n_declared = 0;
    bool have_seed = false, have_n = false, have_ranges = false;
    {
        const std::string body = line.substr(7);
        std::size_t pos = 0;
        while (pos < body.size()) {
            auto end = body.find(", ", pos);
            if (end == std::string::npos) end = body.size();
            const std::string kv = body.substr(pos, end - pos);
            pos = end + 2;
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw DataError("dataset meta: malformed field '" + kv + "'");
            const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            if (key == "seed") {
                ds.seed = std::stoull(val);
                have_seed = true;
            } else if (key == "n") {
                n_declared = std::stoull(val);
                have_n = true;
            } else if (key == "rng") {
                if (val != kRngAlgorithm) throw DataError("dataset meta: unsupported rng '" + val + "'");
            } else if (key == "i_crit") {
                ds.features.i_crit = parse_double(val);
            } else if (key == "ss_lo") {
                ds.features.ss_lo = parse_double(val);
            } else if (key == "ss_hi") {
                ds.features.ss_hi = parse_double(val);
            } else if (key == "ranges") {
                ds.ranges = ranges_from_string(val);
                have_ranges = true;
            } else {
                throw DataError("dataset meta: unknown key '" + key + "'");
            }
        }
    }
    if (!have_seed || !have_n || !have_ranges) throw DataError("dataset meta: seed, n and ranges are required");

    if (!std::getline(is, line) || line != header_line()) throw DataError("dataset: malformed column header");

    constexpr std::size_t kCols = kNumFeatures + kNumParams + 1;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        ++row;
        const auto cells = split_csv(line);
        if (cells.size() != kCols) throw DataError("dataset: row " + std::to_string(row) + " has wrong column count");
        FeatureVector fv;
        std::array<double, kNumParams> pv{};
        for (std::size_t j = 0; j < kNumFeatures + kNumParams; ++j) {
            const double v = parse_double(cells[j]);
            if (!std::isfinite(v)) throw DataError("dataset: non-finite cell in row " + std::to_string(row));
            if (j < kNumFeatures) fv[j] = v;
            else pv[j - kNumFeatures] = v;
        }
        const auto& s = cells.back();
        Split sp;
        if (s == "train") sp = Split::Train;
        else if (s == "val") sp = Split::Val;
        else if (s == "test") sp = Split::Test;
        else throw DataError("dataset: bad split label '" + s + "' in row " + std::to_string(row));
        ds.X.push_back(fv);
        ds.Y.push_back(ModelParams::from_values(pv));
        ds.split.push_back(sp);
    }
    if (ds.size() != n_declared) throw DataError("dataset: meta n does not match row count");
    return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path.string());
    write_dataset_csv(os, ds);
    if (!os) throw DataError("error writing " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot read " + path.string());
    return read_dataset_csv(is);
}

bool is_log_scaled_feature(std::size_t j) {
    // SS, Ion, Ioff, Ids_inte, Ids_rms for both drain biases, then all six Gm features
    return (j >= 7 && j <= 11) || (j >= 13 && j <= 17) || j >= 18;
}

std::array<double, kNumFeatures> Normalizer::normalize(const FeatureVector& fv) const {
    std::array<double, kNumFeatures> z{};
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
        if (log_scale[j] && !(fv[j] > 0.0)) {
            throw DataError("feature " + std::string(kFeatureNames[j]) + " must be positive");
        }
        const double v = log_scale[j] ? std::log10(fv[j]) : fv[j];
        z[j] = (v - mean[j]) / stddev[j];
    }
    return z;
}

FeatureVector Normalizer::denormalize(std::span<const double> z) const {
    if (z.size() != kNumFeatures) throw DataError("expected 24 normalized features");
    FeatureVector fv;
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
        const double v = z[j] * stddev[j] + mean[j];
        fv[j] = log_scale[j] ? std::pow(10.0, v) : v;
    }
    return fv;
}

Normalizer fit_normalizer(const Dataset& ds) {
    const auto train = ds.indices(Split::Train);
    if (train.empty()) throw ConfigError("normalizer: empty training split");
    Normalizer nz;
    nz.ranges = ds.ranges;
    const double m = static_cast<double>(train.size());
    std::vector<double> col(train.size());
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
        nz.log_scale[j] = is_log_scaled_feature(j);
        for (std::size_t k = 0; k < train.size(); ++k) {
            const double x = ds.X[train[k]][j];
            if (nz.log_scale[j] && !(x > 0.0)) {
                throw ConfigError("normalizer: feature " + std::string(kFeatureNames[j]) + " must be positive");
            }
            col[k] = nz.log_scale[j] ? std::log10(x) : x;
        }
        double s = 0.0;
        for (double x : col) s += x;
        const double mu = s / m;
        double v = 0.0;
        for (double x : col) v += (x - mu) * (x - mu);
        const double sd = std::sqrt(v / m);
        if (!(sd > 1e-12 * std::abs(mu)) || !(sd > 0.0) || !std::isfinite(sd)) {
            throw ConfigError("normalizer: feature " + std::string(kFeatureNames[j]) + " has zero variance");
        }
        nz.mean[j] = mu;
        nz.stddev[j] = sd;
    }
    return nz;
}

}  // namespace fetx
