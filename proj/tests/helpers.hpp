#pragma once

#include <cmath>
#include <string>

#include "simm/model.hpp"

namespace simm::testing {

inline std::string data_path(const std::string& name) { return std::string(SIMM_DATA_DIR) + "/" + name; }
inline std::string fixture_path(const std::string& name) {
    return std::string(SIMM_FIXTURE_DIR) + "/" + name;
}

// The one-tracer, three-source example: sources at -10/0/10, sd 1.
inline SimmInput simple_input() {
    SimmData d;
    d.mixtures.resize(10, 1);
    d.mixtures << 4, 4.5, 5, 7, 6, 2, 3, 3.5, 5.5, 6.5;
    d.tracer_names = {"iso1"};
    d.source_names = {"A", "B", "C"};
    d.source_means.resize(3, 1);
    d.source_means << -10, 0, 10;
    d.source_sds = Matrix::Ones(3, 1);
    return SimmInput(std::move(d));
}

inline double normal_logpdf(double x, double mean, double var) {
    return -0.5 * std::log(2.0 * M_PI * var) - (x - mean) * (x - mean) / (2.0 * var);
}

inline double gamma_logpdf(double x, double shape, double rate) {
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace simm::testing
