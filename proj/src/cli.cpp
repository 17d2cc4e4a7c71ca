#include "fetx/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "fetx/config.hpp"
#include "fetx/curve_io.hpp"
#include "fetx/errors.hpp"
#include "fetx/report_io.hpp"
#include "fetx/svg_plot.hpp"
#include "fetx/verify.hpp"

namespace fetx {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string sanitize(const std::string& name) {
    std::string s;
    for (char ch : name) {
        const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '_';
        s += ok ? ch : '_';
    }
    if (s.empty() || s == "." || s == "..") s = "device";
    return s;
}

bool ci_mode() {
    const char* v = std::getenv("CI");
    if (v == nullptr) return false;
    const std::string s(v);
    return !s.empty() && s != "0" && s != "false";
}

/// Tracks everything a command creates under --out so a failed run can be
/// rolled back.
class OutputDir {
public:
    explicit OutputDir(const fs::path& root) : root_(root) {
        if (root_.empty()) throw UsageError("--out is required");
        if (fs::exists(root_) && !fs::is_directory(root_))
            throw DataError("--out exists and is not a directory: " + root_.string());
        make_dirs(root_);
    }
    OutputDir(const OutputDir&) = delete;
    OutputDir& operator=(const OutputDir&) = delete;
    ~OutputDir() {
        if (!committed_) rollback();
    }

    fs::path file(const fs::path& rel) {
        for (const auto& part : rel) {
            if (part == ".." || rel.is_absolute()) throw DataError("output path escapes --out: " + rel.string());
        }
        const fs::path p = root_ / rel;
        make_dirs(p.parent_path());
        files_.push_back(p);
        return p;
    }

    void commit() { committed_ = true; }

private:
    void make_dirs(const fs::path& d) {
        std::vector<fs::path> missing;
        for (fs::path q = d; !q.empty() && !fs::exists(q); q = q.parent_path()) {
            missing.push_back(q);
            if (q == q.parent_path()) break;
        }
        for (auto it = missing.rbegin(); it != missing.rend(); ++it) {
            fs::create_directory(*it);
            dirs_.push_back(*it);
        }
    }

    void rollback() noexcept {
        std::error_code ec;
        for (const auto& f : files_) fs::remove(f, ec);
        for (auto it = dirs_.rbegin(); it != dirs_.rend(); ++it) fs::remove(*it, ec);  // empty dirs only
    }

    fs::path root_;
    std::vector<fs::path> files_;
    std::vector<fs::path> dirs_;
    bool committed_ = false;
};

struct Flags {
    std::string config;
    std::string out;
    std::string data;
    std::string model;
    std::string curves;
    std::string params;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::size_t n = 0;
    std::size_t epochs = 0;
    std::size_t patience = 0;
    std::size_t held_out = 0;
    bool variability = false;

    std::map<std::string, CLI::Option*> opts;
    bool given(const std::string& name) const {
        auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }
};

Config resolve(const Flags& f) {
    Config c;
    if (!f.config.empty()) c = load_config(f.config);
    if (f.given("out")) c.paths.out = f.out;
    if (f.given("data")) c.paths.data = f.data;
    if (f.given("model")) c.paths.model = f.model;
    if (f.given("curves")) c.paths.curves = f.curves;
    if (f.given("params")) c.paths.params = f.params;
    if (f.given("threads")) c.threads = f.threads;
    if (f.given("n")) c.n = f.n;
    if (f.given("epochs")) c.train.max_epochs = f.epochs;
    if (f.given("patience")) c.train.patience = f.patience;
    if (f.given("held-out")) c.held_out = f.held_out;
    return c;
}

void require_seed(const Flags& f, const char* cmd) {
    if (ci_mode() && !f.given("seed")) throw UsageError(std::string(cmd) + ": --seed is mandatory when CI is set");
}

void echo_config(OutputDir& o, const Config& c) { write_json_file(o.file("effective_config.json"), config_to_json(c)); }

struct Device {
    std::string name;
    CurveSet curves;
};

std::string device_name(const fs::path& dir) {
    fs::path p = dir;
    if (!p.has_filename()) p = p.parent_path();
    const std::string s = p.filename().string();
    return (s.empty() || s == ".") ? "device" : s;
}

/// A single device directory, or every device directory directly below `root`.
std::vector<Device> load_devices(const fs::path& root) {
    if (!fs::is_directory(root)) throw DataError("curves directory not found: " + root.string());
    if (is_device_dir(root)) return {{device_name(root), load_curveset(root)}};
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_directory() && is_device_dir(e.path())) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty())
        throw DataError("no device directories (ids_low.csv, ids_high.csv, cgg_low.csv) under " + root.string());
    std::vector<Device> out;
    for (const auto& d : dirs) out.push_back({device_name(d), load_curveset(d)});
    return out;
}

void write_overlay_csv(const fs::path& path, const char* xname, const Curve& target, const Curve& pred) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path.string());
    os << xname << ",target,extracted\n";
    for (std::size_t k = 0; k < target.x.size(); ++k)
        os << format_double(target.x[k]) << ',' << format_double(target.y[k]) << ',' << format_double(pred.y[k])
           << '\n';
}

void emit_overlays(OutputDir& o, const fs::path& dir, const std::string& title, const CurveSet& target,
                   const ModelParams& pred, const std::optional<ModelParams>& truth, const std::vector<double>& vgs) {
    const Curve il = simulate_like(pred, target.ids_low);
    const Curve ih = simulate_like(pred, target.ids_high);
    struct Pair {
        const char* stem;
        std::string label;
        Curve target, pred;
        const char* ylabel;
        bool log_y;
    };
    const std::vector<Pair> pairs = {
        {"cgg_vgs", "Cgg-Vgs", target.cgg_low, simulate_like(pred, target.cgg_low), "Cgg (fF)", false},
        {"ids_vgs_low", "Ids-Vgs @ Vds=" + short_num(target.ids_low.grid.bias) + " V", target.ids_low, il,
         "Ids (A)", true},
        {"ids_vgs_high", "Ids-Vgs @ Vds=" + short_num(target.ids_high.grid.bias) + " V", target.ids_high, ih,
         "Ids (A)", true},
        {"gm_vgs_low", "Gm-Vgs @ Vds=" + short_num(target.ids_low.grid.bias) + " V",
         differentiate(target.ids_low, 1), differentiate(il, 1), "Gm (A/V)", false},
        {"gm_vgs_high", "Gm-Vgs @ Vds=" + short_num(target.ids_high.grid.bias) + " V",
         differentiate(target.ids_high, 1), differentiate(ih, 1), "Gm (A/V)", false},
    };
    for (const auto& p : pairs) {
        write_overlay_csv(o.file(dir / (std::string(p.stem) + ".csv")), "vgs", p.target, p.pred);
        save_svg(o.file(dir / (std::string(p.stem) + ".svg")), {title + ": " + p.label, "Vgs (V)", p.ylabel, p.log_y},
                 {{"target", p.target.x, p.target.y, "#1f77b4", false},
                  {"extracted", p.pred.x, p.pred.y, "#d62728", true}});
    }

    if (vgs.empty()) return;
    const auto fam = simulate_ids_vds(pred, vgs);
    std::vector<Curve> tfam;
    if (truth) tfam = simulate_ids_vds(*truth, vgs);
    {
        std::ofstream os(o.file(dir / "ids_vds.csv"), std::ios::binary);
        if (!os) throw DataError("cannot write ids_vds.csv");
        os << "vds";
        for (double v : vgs) {
            if (truth) os << ",target_vgs=" << short_num(v);
            os << ",extracted_vgs=" << short_num(v);
        }
        os << '\n';
        for (std::size_t k = 0; k < fam.front().x.size(); ++k) {
            os << format_double(fam.front().x[k]);
            for (std::size_t i = 0; i < vgs.size(); ++i) {
                if (truth) os << ',' << format_double(tfam[i].y[k]);
                os << ',' << format_double(fam[i].y[k]);
            }
            os << '\n';
        }
    }
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::vector<Series> series;
    for (std::size_t i = 0; i < vgs.size(); ++i) {
        const std::string color = palette[i % 6];
        const std::string tag = " Vgs=" + short_num(vgs[i]);
        if (truth) series.push_back({"target" + tag, tfam[i].x, tfam[i].y, color, false});
        series.push_back({"extracted" + tag, fam[i].x, fam[i].y, color, true});
    }
    save_svg(o.file(dir / "ids_vds.svg"), {title + ": Ids-Vds", "Vds (V)", "Ids (A)", true}, series);
}

json summary_to_json(const ErrorSummary& s) {
    json med = json::object();
    for (std::size_t c = 0; c < kNumReportedCurves; ++c) med[std::string(kReportedCurves[c])] = s.median_rms[c];
    return {{"devices", s.count},
            {"median_rms_percent", med},
            {"median_subthreshold_rms_percent",
             {{std::string(kReportedCurves[1]), s.median_subthreshold[0]},
              {std::string(kReportedCurves[2]), s.median_subthreshold[1]}}}};
}

void print_summary(std::ostream& out, const ErrorSummary& s) {
    out << "median rms% over " << s.count << " device(s):\n";
    for (std::size_t c = 0; c < kNumReportedCurves; ++c) {
        out << "  " << kReportedCurves[c] << std::string(20 - kReportedCurves[c].size(), ' ') << fixed(s.median_rms[c]);
        if (c == 1 || c == 2) out << "   subthreshold(log) " << fixed(s.median_subthreshold[c - 1]);
        out << '\n';
    }
}

void print_variability(std::ostream& out, const VariabilityResult& v) {
    out << "variability rms%:\n  " << std::string(20, ' ');
    for (const auto& r : v.reports) {
        const std::string l = "lg=" + fixed(r.knobs.lg_scale, 2) + ",eot=" + fixed(r.knobs.eot_scale, 2);
        out << l << std::string(18 - l.size(), ' ');
    }
    out << "average\n";
    for (std::size_t c = 0; c < kNumReportedCurves; ++c) {
        out << "  " << kReportedCurves[c] << std::string(20 - kReportedCurves[c].size(), ' ');
        for (const auto& r : v.reports) {
            const std::string s = fixed(r.curves[c].rms_percent);
            out << s << std::string(18 - s.size(), ' ');
        }
        out << fixed(v.average_rms[c]) << '\n';
    }
}

void log_clipping(std::ostream& out, const ModelParams& base, const ParamRanges& ranges) {
    for (const auto& k : variability_knobs()) {
        std::vector<std::string> clipped;
        apply_knobs(base, k, ranges, &clipped);
        for (const auto& name : clipped)
            out << "note: knobs (lg " << k.lg_scale << ", eot " << k.eot_scale << ") clipped " << name << '\n';
    }
}

// ---------------------------------------------------------------------------

int cmd_gen(const Flags& f, std::ostream& out) {
    require_seed(f, "gen");
    Config c = resolve(f);
    if (f.given("seed")) c.seed = f.seed;
    c.validate();
    OutputDir o(c.paths.out);
    echo_config(o, c);
    const unsigned threads = resolve_threads(c.threads);
    const auto t0 = Clock::now();
    const Dataset ds = build_dataset(c.n, c.seed, c.ranges, c.features, threads);
    const double secs = seconds_since(t0);
    save_dataset(o.file("dataset.csv"), ds);
    o.commit();
    out << "gen n=" << ds.size() << " seed=" << c.seed << " threads=" << threads << " wall_seconds=" << fixed(secs)
        << '\n';
    return kExitOk;
}

struct Trained {
    ExtractorModel model;
    TrainResult result;
    double seconds = 0.0;
};

Trained train_and_save(OutputDir& o, const Dataset& ds, const Config& c, std::ostream& out) {
    const Normalizer norm = fit_normalizer(ds);
    const auto t0 = Clock::now();
    TrainResult res = train(ds, norm, c.mlp, c.train, [&](const EpochRecord& r) {
        if (r.epoch == 1 || r.epoch % 50 == 0)
            out << "epoch " << r.epoch << " train_loss=" << format_double(r.train_loss)
                << " val_loss=" << format_double(r.val_loss) << " wall_seconds=" << fixed(r.wall_seconds, 1) << '\n';
    });
    const double secs = seconds_since(t0);
    ExtractorModel m{c.mlp, res.weights, norm, ds.features};
    save_model(o.file("model.json"), m);
    {
        std::ofstream os(o.file("history.csv"), std::ios::binary);
        if (!os) throw DataError("cannot write history.csv");
        os << "epoch,learning_rate,train_loss,val_loss\n";
        for (const auto& r : res.history)
            os << r.epoch << ',' << format_double(c.train.learning_rate_at(r.epoch)) << ','
               << format_double(r.train_loss) << ',' << format_double(r.val_loss) << '\n';
    }
    out << "train epochs=" << res.history.size() << " best_epoch=" << res.best_epoch
        << " final_val_loss=" << format_double(res.history.back().val_loss)
        << " best_val_loss=" << format_double(res.best_val_loss) << " wall_seconds=" << fixed(secs) << '\n';
    return {std::move(m), std::move(res), secs};
}

int cmd_train(const Flags& f, std::ostream& out) {
    require_seed(f, "train");
    Config c = resolve(f);
    if (f.given("seed")) c.mlp.seed = c.train.seed = f.seed;
    c.validate();
    if (c.paths.data.empty()) throw UsageError("train: --data is required");
    const Dataset ds = load_dataset(c.paths.data);
    OutputDir o(c.paths.out);
    echo_config(o, c);
    train_and_save(o, ds, c, out);
    o.commit();
    return kExitOk;
}

int cmd_features(const Flags& f, std::ostream& out) {
    Config c = resolve(f);
    c.validate();
    if (c.paths.curves.empty()) throw UsageError("features: --curves is required");
    const auto devices = load_devices(c.paths.curves);
    std::vector<FeatureVector> rows;
    for (const auto& d : devices) rows.push_back(featurize(d.curves, c.features));

    OutputDir o(c.paths.out);
    echo_config(o, c);
    std::ofstream os(o.file("features.csv"), std::ios::binary);
    if (!os) throw DataError("cannot write features.csv");
    os << "device";
    for (auto name : kFeatureNames) os << ',' << name;
    os << '\n';
    for (std::size_t i = 0; i < devices.size(); ++i) {
        os << sanitize(devices[i].name);
        for (double v : rows[i].values) os << ',' << format_double(v);
        os << '\n';
    }
    os.close();
    o.commit();
    out << "features devices=" << devices.size() << '\n';
    return kExitOk;
}

int cmd_extract(const Flags& f, std::ostream& out) {
    Config c = resolve(f);
    c.validate();
    if (c.paths.curves.empty()) throw UsageError("extract: --curves is required");
    if (c.paths.model.empty()) throw UsageError("extract: --model is required");
    const ExtractorModel model = load_model(c.paths.model);
    const auto devices = load_devices(c.paths.curves);
    std::vector<NamedParams> result;
    for (const auto& d : devices) {
        const auto t0 = Clock::now();
        const ModelParams p = predict_params(model, featurize(d.curves, model.features));
        out << "extract device=" << d.name << " seconds=" << format_double(seconds_since(t0)) << '\n';
        result.push_back({d.name, p});
    }
    OutputDir o(c.paths.out);
    echo_config(o, c);
    save_params_file(o.file("params.json"), result);
    o.commit();
    return kExitOk;
}

int cmd_verify(const Flags& f, std::ostream& out) {
    Config c = resolve(f);
    c.validate();
    const bool have_curves = !c.paths.curves.empty();
    const bool have_params = !c.paths.params.empty();
    if (!have_curves && !have_params && !f.variability)
        throw UsageError("verify: give --curves, --params and/or --variability");

    std::optional<ExtractorModel> model;
    if (!c.paths.model.empty()) model = load_model(c.paths.model);
    const bool needs_model = f.variability || have_curves != have_params;
    if (needs_model && !model) throw UsageError("verify: --model is required unless both --curves and --params are given");
    const double i_crit = model ? model->features.i_crit : c.features.i_crit;
    const ParamRanges ranges = model ? model->normalizer.ranges : c.ranges;

    std::vector<Device> devices;
    std::vector<NamedParams> params;
    if (have_curves) devices = load_devices(c.paths.curves);
    if (have_params) params = load_params_file(c.paths.params);

    struct Case {
        std::string name;
        CurveSet target;
        std::optional<ModelParams> truth;
        VerifyReport report;
    };
    std::vector<Case> cases;
    if (have_curves && have_params) {
        for (const auto& d : devices) {
            const NamedParams* match = nullptr;
            if (devices.size() == 1 && params.size() == 1) match = &params.front();
            for (const auto& np : params) {
                if (np.name == d.name) match = &np;
            }
            if (!match) throw DataError("no parameters for device '" + d.name + "' in " + c.paths.params);
            cases.push_back({d.name, d.curves, std::nullopt, compare_curves(d.curves, match->params, i_crit, {}, ranges)});
        }
    } else if (have_curves) {
        for (const auto& d : devices) cases.push_back({d.name, d.curves, std::nullopt, round_trip(d.curves, *model)});
    } else if (have_params) {
        for (const auto& np : params) {
            const CurveSet target = simulate_curveset(np.params);
            cases.push_back({np.name, target, np.params, round_trip(target, *model, np.params)});
        }
    }

    OutputDir o(c.paths.out);
    echo_config(o, c);
    if (!cases.empty()) {
        json reps = json::array();
        std::vector<VerifyReport> all;
        for (auto& cs : cases) {
            cs.report.label = cs.name;
            reps.push_back(report_to_json(cs.report));
            all.push_back(cs.report);
            emit_overlays(o, fs::path("devices") / sanitize(cs.name), cs.name, cs.target, cs.report.predicted,
                          cs.truth, c.ids_vds_vgs);
        }
        const ErrorSummary s = summarize(all);
        write_json_file(o.file("report.json"), {{"devices", reps}, {"summary", summary_to_json(s)}});
        print_summary(out, s);
    }
    if (f.variability) {
        const ModelParams base = have_params ? params.front().params : reference_params();
        log_clipping(out, base, ranges);
        const VariabilityResult v = variability_suite(base, *model);
        write_json_file(o.file("variability.json"), variability_to_json(v));
        for (const auto& r : v.reports) {
            emit_overlays(o, fs::path("variability") / sanitize(r.label), r.label, simulate_curveset(*r.truth),
                          r.predicted, r.truth, c.ids_vds_vgs);
        }
        print_variability(out, v);
    }
    o.commit();
    return kExitOk;
}

int cmd_demo(const Flags& f, std::ostream& out) {
    Config c = resolve(f);
    c.validate();
    OutputDir o(c.paths.out);
    echo_config(o, c);

    const unsigned threads = resolve_threads(c.threads);
    const auto t0 = Clock::now();
    const Dataset ds = build_dataset(c.n, c.seed, c.ranges, c.features, threads);
    const double gen_secs = seconds_since(t0);
    save_dataset(o.file("dataset.csv"), ds);
    out << "gen n=" << ds.size() << " seed=" << c.seed << " threads=" << threads << " wall_seconds=" << fixed(gen_secs)
        << '\n';

    const Trained t = train_and_save(o, ds, c, out);

    const auto test = ds.indices(Split::Test);
    const std::size_t count = std::min(c.held_out, test.size());
    if (count < c.held_out) out << "note: only " << count << " held-out devices available\n";
    std::vector<VerifyReport> reports;
    json reps = json::array();
    for (std::size_t k = 0; k < count; ++k) {
        const ModelParams& p = ds.Y[test[k]];
        VerifyReport r = round_trip(simulate_curveset(p), t.model, p);
        r.label = "test-" + std::to_string(test[k]);
        reps.push_back(report_to_json(r));
        reports.push_back(std::move(r));
    }
    const ErrorSummary s = summarize(reports);
    write_json_file(o.file("report.json"), {{"devices", reps}, {"summary", summary_to_json(s)}});

    log_clipping(out, reference_params(), t.model.normalizer.ranges);
    const VariabilityResult v = variability_suite(reference_params(), t.model);
    write_json_file(o.file("variability.json"), variability_to_json(v));
    for (const auto& r : v.reports) {
        emit_overlays(o, fs::path("variability") / sanitize(r.label), r.label, simulate_curveset(*r.truth),
                      r.predicted, r.truth, c.ids_vds_vgs);
    }

    bool pass = true;
    json checks = json::array();
    auto check = [&](const std::string& what, double value, double limit) {
        const bool ok = value <= limit;
        pass = pass && ok;
        checks.push_back({{"check", what}, {"value", value}, {"limit", limit}, {"pass", ok}});
        return ok;
    };
    out << "\n" << std::string(22, ' ') << "held-out median   limit   variability max   limit\n";
    for (std::size_t cidx = 0; cidx < kNumReportedCurves; ++cidx) {
        const std::string name(kReportedCurves[cidx]);
        const double lim = kDemoMedianLimits[cidx];
        const bool a = check("median " + name, s.median_rms[cidx], lim);
        // every knob setting, baseline excluded
        double worst = 0.0;
        for (std::size_t r = 1; r < v.reports.size(); ++r) worst = std::max(worst, v.reports[r].curves[cidx].rms_percent);
        const bool b = check("variability worst " + name, worst, kDemoVariabilityFactor * s.median_rms[cidx]);
        out << "  " << name << std::string(20 - name.size(), ' ') << fixed(s.median_rms[cidx]) << (a ? "  " : "* ")
            << std::string(13 - fixed(s.median_rms[cidx]).size(), ' ') << fixed(lim, 1) << "     "
            << fixed(worst) << (b ? "  " : "* ") << std::string(14 - fixed(worst).size(), ' ')
            << fixed(kDemoVariabilityFactor * s.median_rms[cidx]) << '\n';
    }
    for (std::size_t k = 0; k < 2; ++k) {
        const std::string name = "subthreshold " + std::string(kReportedCurves[k + 1]);
        const bool ok = check("median " + name, s.median_subthreshold[k], kDemoSubthresholdLimit);
        out << "  " << name << "  " << fixed(s.median_subthreshold[k]) << (ok ? "  " : "* ") << fixed(kDemoSubthresholdLimit, 1)
            << '\n';
    }
    out << '\n';
    print_variability(out, v);

    write_json_file(o.file("summary.json"), {{"pass", pass},
                                             {"gen_seconds", gen_secs},
                                             {"train_seconds", t.seconds},
                                             {"best_epoch", t.result.best_epoch},
                                             {"held_out", summary_to_json(s)},
                                             {"checks", checks}});
    o.commit();
    out << (pass ? "demo PASS" : "demo FAIL") << '\n';
    return pass ? kExitOk : kExitAcceptance;
}

void report_error(std::ostream& err, const char* kind, int code, const std::string& msg,
                  const std::string& feature = {}) {
    json j = {{"error", kind}, {"exit", code}, {"message", msg}};
    if (!feature.empty()) j["feature"] = feature;
    err << j.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Compact-model parameter extraction from I-V and C-V curves", "fetx"};
    app.require_subcommand(1);
    Flags f;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON config file (flags override it)");
        sub->add_option("--out", f.out, "Output directory");
        sub->add_option("--threads", f.threads, "Worker cap (0: all cores)");
    };
    auto seed = [&](CLI::App* sub) { sub->add_option("--seed", f.seed, "RNG seed"); };

    auto* gen = app.add_subcommand("gen", "Generate the Monte Carlo dataset");
    common(gen);
    seed(gen);
    gen->add_option("--n", f.n, "Number of samples (default 25000)");

    auto* trn = app.add_subcommand("train", "Train the extraction network");
    common(trn);
    seed(trn);
    trn->add_option("--data", f.data, "Dataset CSV");
    trn->add_option("--epochs", f.epochs, "Maximum epochs");
    trn->add_option("--patience", f.patience, "Early-stopping patience");

    auto* fea = app.add_subcommand("features", "Compute the 24 features of device curves");
    common(fea);
    fea->add_option("--curves", f.curves, "Device directory or directory of devices");

    auto* ext = app.add_subcommand("extract", "Extract model parameters from curves");
    common(ext);
    ext->add_option("--curves", f.curves, "Device directory or directory of devices");
    ext->add_option("--model", f.model, "Trained model file");

    auto* ver = app.add_subcommand("verify", "Score extracted parameters against target curves");
    common(ver);
    ver->add_option("--curves", f.curves, "Target curves");
    ver->add_option("--params", f.params, "Parameter file (targets, or fits when --curves is given)");
    ver->add_option("--model", f.model, "Trained model file");
    ver->add_flag("--variability", f.variability, "Run the five-setting process variability suite");

    auto* demo = app.add_subcommand("demo", "Generate, train and verify with fixed seeds");
    common(demo);
    demo->add_option("--n", f.n, "Number of samples (default 25000)");
    demo->add_option("--epochs", f.epochs, "Maximum epochs");
    demo->add_option("--patience", f.patience, "Early-stopping patience");
    demo->add_option("--held-out", f.held_out, "Test devices to score (default 200)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        report_error(err, "usage", kExitUsage, e.what());
        return kExitUsage;
    }

    for (auto* opt : app.get_subcommands().front()->get_options()) f.opts[opt->get_single_name()] = opt;

    try {
        if (gen->parsed()) return cmd_gen(f, out);
        if (trn->parsed()) return cmd_train(f, out);
        if (fea->parsed()) return cmd_features(f, out);
        if (ext->parsed()) return cmd_extract(f, out);
        if (ver->parsed()) return cmd_verify(f, out);
        return cmd_demo(f, out);
    } catch (const UsageError& e) {
        report_error(err, "usage", kExitUsage, e.what());
        return kExitUsage;
    } catch (const ConfigError& e) {
        report_error(err, "config", kExitUsage, e.what());
        return kExitUsage;
    } catch (const ExtractionError& e) {
        report_error(err, "extraction", kExitData, e.what(), e.feature());
    } catch (const InvalidParameter& e) {
        report_error(err, "invalid_parameter", kExitData, e.what());
    } catch (const DataError& e) {
        report_error(err, "data", kExitData, e.what());
    } catch (const TrainingError& e) {
        report_error(err, "training", kExitData, e.what());
    } catch (const fs::filesystem_error& e) {
        report_error(err, "io", kExitData, e.what());
    } catch (const std::exception& e) {
        report_error(err, "internal", kExitData, e.what());
    }
    return kExitData;
}

}  // namespace fetx
