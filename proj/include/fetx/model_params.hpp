#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace fetx {

inline constexpr std::size_t kNumParams = 14;

inline constexpr std::array<std::string_view, kNumParams> kParamNames = {
    "PHIG", "ETA0", "CIT",    "CDSC",   "U0",     "UA",    "VSATV",
    "LAMBDA", "RDSW", "IOFF0", "CGGMAX", "CGGMIN", "DVTCV", "ACV"};

/// The 14 surrogate compact-model parameters. Field order matches kParamNames
/// and is the regression target order of the network.
struct ModelParams {
    double phig = 4.45;     // gate work function, eV
    double eta0 = 0.10;     // DIBL coefficient, V/V
    double cit = 0.10;      // interface-trap ideality contribution
    double cdsc = 0.05;     // drain-coupled ideality contribution
    double u0 = 1.0;        // mobility prefactor
    double ua = 0.8;        // vertical-field mobility degradation, 1/V
    double vsatv = 0.4;     // saturation-voltage scale, V
    double lambda = 0.1;    // channel-length modulation, 1/V
    double rdsw = 500.0;    // series-resistance degeneration, 1/A
    double ioff0 = 1e-9;    // leakage floor, A
    double cggmax = 1.0;    // fF
    double cggmin = 0.25;   // fF
    double dvtcv = 0.0;     // C-V threshold offset from Vth0, V
    double acv = 0.1;       // C-V transition width, V

    std::array<double, kNumParams> values() const {
        return {phig, eta0, cit, cdsc, u0, ua, vsatv, lambda, rdsw, ioff0, cggmax, cggmin, dvtcv, acv};
    }

    static ModelParams from_values(std::span<const double> v);

    bool operator==(const ModelParams&) const = default;
};

/// Default-constructed ModelParams: the nominal device used by the variability
/// suite and the golden-value tests.
inline ModelParams reference_params() { return ModelParams{}; }

/// Index of a parameter name in kParamNames, or kNumParams when unknown.
std::size_t param_index(std::string_view name);

}  // namespace fetx
