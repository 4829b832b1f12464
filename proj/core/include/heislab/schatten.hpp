#pragma once

#include "heislab/linalg.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace heislab {

// Relative clamp applied to computed spectra before any log-log work.
inline constexpr double kSpectrumClamp = 1e-13;

class SingularSpectrum {
public:
    SingularSpectrum() = default;
    // Values must already be nonincreasing and nonnegative.
    explicit SingularSpectrum(std::vector<double> values);
    // Sorts, then zeroes anything below kSpectrumClamp * max.
    static SingularSpectrum from_unsorted(std::vector<double> values);

    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    double operator[](std::size_t k) const { return values_[k]; }
    double top() const { return values_.empty() ? 0.0 : values_.front(); }

    // Number of strictly positive entries.
    std::size_t nonzero_count() const;
    // Spectrum of |A|^p given the spectrum of A.
    SingularSpectrum power(double p) const;

private:
    std::vector<double> values_;
};

struct IndexRange {
    std::size_t lo = 0;  // inclusive, 0-based
    std::size_t hi = 0;  // exclusive
};

struct WeakFit {
    double quasinorm = 0.0;
    double slope = 0.0;
    IndexRange fit_range;
};

SingularSpectrum singular_values(const CMatrix& a);
SingularSpectrum singular_values(const RMatrix& a);

// sup_k (k+1)^{1/p} mu(k) over the available entries; a lower approximant of
// the weak-L_p quasinorm of the untruncated operator.
double weak_quasinorm(const SingularSpectrum& s, double p);

double schatten_norm(const SingularSpectrum& s, double p);

std::vector<double> separable_profile(const SingularSpectrum& s, double p);

// (sum_{k<N} mu(k)) / log(N+2).
double dixmier_approximant(const SingularSpectrum& s, std::size_t window);

// Same functional on a (possibly non-normal) finite operator, using its
// eigenvalues ordered by decreasing modulus. Returns the real part.
double dixmier_eigen_approximant(const CVector& eigenvalues, std::size_t window);

// Least-squares slope of log mu(k) against log(k+1) on [lo, hi).
// Zero entries inside the range are rejected.
WeakFit fit_weak(const SingularSpectrum& s, double p, IndexRange range);

// Decade [sqrt(r/10), sqrt(10 r)] centred in log scale on [1, r], as 0-based
// indices clipped to the spectrum.
IndexRange middle_decade(std::size_t resolved, std::size_t size);

void write_spectrum_csv(std::ostream& os, const SingularSpectrum& s, double p);

}  // namespace heislab
