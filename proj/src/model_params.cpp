#include "fetx/model_params.hpp"

#include "fetx/errors.hpp"

namespace fetx {

ModelParams ModelParams::from_values(std::span<const double> v) {
    if (v.size() != kNumParams) throw DataError("expected 14 parameter values");
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11], v[12], v[13]};
}

std::size_t param_index(std::string_view name) {
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (kParamNames[i] == name) return i;
    }
    return kNumParams;
}

}  // namespace fetx
