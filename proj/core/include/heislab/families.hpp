#pragma once

#include "heislab/grid.hpp"

#include <functional>
#include <string>
#include <vector>

namespace heislab {

// A test function in physical coordinates (x, y, t).
struct TestFunction {
    std::string id;
    std::function<double(double, double, double)> eval;
};

using Family = std::vector<TestFunction>;

struct SampledFunction {
    std::string id;
    GridFunction values;
};

// Named sets: see family_names(). Throws std::invalid_argument on an unknown name.
Family named_family(const std::string& name);
std::vector<std::string> family_names();

std::vector<SampledFunction> sample_family(const GridSpec& spec, const Family& family);

// Smooth bump exp(-|z - c|^2/(2 s^2) - (t - ct)^2/(2 tau^2)) times a C^2 cutoff
// that vanishes outside the box [-a, a]^2 x [-b, b].
TestFunction gaussian_bump(std::string id, double cx, double cy, double ct, double s, double tau, double a, double b);
TestFunction constant_function(std::string id, double c);
TestFunction scaled(std::string id, const TestFunction& f, double c);

}  // namespace heislab
