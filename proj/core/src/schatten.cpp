#include "heislab/schatten.hpp"

#include "heislab/io.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace heislab {

SingularSpectrum::SingularSpectrum(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k]) || values_[k] < 0.0) {
            throw std::invalid_argument("SingularSpectrum: entries must be finite and nonnegative");
        }
        if (k > 0 && values_[k] > values_[k - 1]) {
            throw std::invalid_argument("SingularSpectrum: entries must be nonincreasing");
        }
    }
}

SingularSpectrum SingularSpectrum::from_unsorted(std::vector<double> values) {
    for (double& v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("SingularSpectrum: non-finite entry");
        v = std::abs(v);
    }
    std::sort(values.begin(), values.end(), std::greater<>());
    if (!values.empty()) {
        const double cut = kSpectrumClamp * values.front();
        for (double& v : values) {
            if (v < cut) v = 0.0;
        }
    }
    return SingularSpectrum(std::move(values));
}

std::size_t SingularSpectrum::nonzero_count() const {
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [](double v) { return v > 0.0; }));
}

SingularSpectrum SingularSpectrum::power(double p) const {
    if (!(p > 0.0)) throw std::invalid_argument("SingularSpectrum::power: exponent must be positive");
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(),
                   [p](double v) { return std::pow(v, p); });
    return SingularSpectrum(std::move(out));
}

namespace {

SingularSpectrum from_rvector(const RVector& s) {
    return SingularSpectrum::from_unsorted(std::vector<double>(s.data(), s.data() + s.size()));
}

}  // namespace

SingularSpectrum singular_values(const CMatrix& a) {
    if (!all_finite(a)) throw std::invalid_argument("singular_values: non-finite entries");
    return from_rvector(complex_singular_values(a));
}

SingularSpectrum singular_values(const RMatrix& a) {
    if (!all_finite(a)) throw std::invalid_argument("singular_values: non-finite entries");
    return from_rvector(real_singular_values(a));
}

double weak_quasinorm(const SingularSpectrum& s, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("weak_quasinorm: exponent must be positive");
    if (s.empty()) throw std::invalid_argument("weak_quasinorm: empty spectrum");
    double best = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        best = std::max(best, std::pow(static_cast<double>(k + 1), 1.0 / p) * s[k]);
    }
    return best;
}

double schatten_norm(const SingularSpectrum& s, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("schatten_norm: exponent must be >= 1");
    if (s.empty()) throw std::invalid_argument("schatten_norm: empty spectrum");
    // Scale by the top value to keep large p from overflowing.
    const double top = s.top();
    if (top == 0.0) return 0.0;
    double acc = 0.0;
    for (double v : s.values()) acc += std::pow(v / top, p);
    return top * std::pow(acc, 1.0 / p);
}

std::vector<double> separable_profile(const SingularSpectrum& s, double p) {
    if (s.empty()) throw std::invalid_argument("separable_profile: empty spectrum");
    std::vector<double> out(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        out[k] = static_cast<double>(k) * std::pow(s[k], p);
    }
    return out;
}

double dixmier_approximant(const SingularSpectrum& s, std::size_t window) {
    if (window == 0) throw std::invalid_argument("dixmier_approximant: window must be positive");
    if (window > s.size()) throw std::invalid_argument("dixmier_approximant: window exceeds spectrum");
    const auto& v = s.values();
    const double partial = std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(window), 0.0);
    return partial / std::log(static_cast<double>(window) + 2.0);
}

double dixmier_eigen_approximant(const CVector& eigenvalues, std::size_t window) {
    if (window == 0) throw std::invalid_argument("dixmier_eigen_approximant: window must be positive");
    if (window > static_cast<std::size_t>(eigenvalues.size())) {
        throw std::invalid_argument("dixmier_eigen_approximant: window exceeds spectrum");
    }
    std::vector<cplx> ev(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
    std::stable_sort(ev.begin(), ev.end(),
                     [](const cplx& a, const cplx& b) { return std::abs(a) > std::abs(b); });
    double partial = 0.0;
    for (std::size_t k = 0; k < window; ++k) partial += ev[k].real();
    return partial / std::log(static_cast<double>(window) + 2.0);
}

WeakFit fit_weak(const SingularSpectrum& s, double p, IndexRange range) {
    if (!(p > 0.0)) throw std::invalid_argument("fit_weak: exponent must be positive");
    if (range.hi > s.size() || range.hi < range.lo + 2) {
        throw std::invalid_argument("fit_weak: fit range needs at least two points inside the spectrum");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0, q = 0;
    const double m = static_cast<double>(range.hi - range.lo);
    for (std::size_t k = range.lo; k < range.hi; ++k) {
        if (s[k] <= 0.0) throw std::invalid_argument("fit_weak: zero singular value inside fit range");
        const double x = std::log(static_cast<double>(k + 1));
        const double y = std::log(s[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        q = std::max(q, std::pow(static_cast<double>(k + 1), 1.0 / p) * s[k]);
    }
    WeakFit fit;
    fit.quasinorm = q;
    fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.fit_range = range;
    return fit;
}

IndexRange middle_decade(std::size_t resolved, std::size_t size) {
    if (resolved < 10) throw std::invalid_argument("middle_decade: resolved range too short");
    const double r = static_cast<double>(resolved);
    // 1-based positions k in [sqrt(r/10), sqrt(10 r)] -> 0-based indices.
    const auto lo1 = static_cast<std::size_t>(std::lround(std::sqrt(r / 10.0)));
    const auto hi1 = static_cast<std::size_t>(std::lround(std::sqrt(10.0 * r)));
    IndexRange out;
    out.lo = std::max<std::size_t>(lo1, 1) - 1;
    out.hi = std::min(hi1, size);
    return out;
}

void write_spectrum_csv(std::ostream& os, const SingularSpectrum& s, double p) {
    CsvWriter csv(os);
    csv.row({"k", "mu", "k_mu_p"});
    const auto prof = separable_profile(s, p);
    for (std::size_t k = 0; k < s.size(); ++k) {
        csv.row({std::to_string(k), format_double(s[k]), format_double(prof[k])});
    }
}

}  // namespace heislab
