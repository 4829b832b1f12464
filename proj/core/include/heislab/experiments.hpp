#pragma once

#include "heislab/families.hpp"
#include "heislab/grid.hpp"
#include "heislab/hermite.hpp"
#include "heislab/io.hpp"
#include "heislab/schatten.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace heislab {

struct ExperimentRow {
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool excluded = false;  // degenerate row (both sides zero)
    Json extra = Json::object();
};

struct ExperimentSummary {
    std::size_t rows_used = 0;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
    double spread = 0.0;           // max / min
    double relative_spread = 0.0;  // (max - min) / mean
    double cov = 0.0;              // population std / mean
};

ExperimentSummary summarize(const std::vector<ExperimentRow>& rows);

struct ExperimentReport {
    std::string name;
    std::string config_digest;
    std::vector<ExperimentRow> rows;
    ExperimentSummary summary;
    Json diagnostics = Json::object();

    void recompute_summary() { summary = summarize(rows); }
    Json to_json() const;
    void write_csv(std::ostream& os) const;
};

struct ExecutionPolicy {
    bool parallel = false;
};

// Index window for the decay fit of a grid commutator spectrum: the middle
// decade of the first (N/2)^kResolvedModeExponent singular values, N the
// horizontal node count. The vertical spacing limits resolution, so the count
// of trustworthy singular values grows slower than the node count N^3.
inline constexpr double kResolvedModeExponent = 2.25;
IndexRange decay_fit_range(const GridSpec& spec, std::size_t spectrum_size);

// Weak quasinorm of [R_l, M_f] against the Sobolev seminorm, plus fitted decay
// slope per row. Constant members are kept as excluded rows.
ExperimentReport bound_experiment(const GridModel& model, const std::vector<SampledFunction>& family, int l,
                                  ExecutionPolicy policy = {});

struct DixmierValue {
    double value = 0.0;
    double band_lo = 0.0;
    double band_hi = 0.0;
    std::size_t window = 0;
    double relative_band() const { return value > 0.0 ? (band_hi - band_lo) / value : 0.0; }
};

inline constexpr std::size_t kMinDixmierWindow = 50;

// Dixmier approximant of |[R_l, M_f]|^{2n+2} at the largest usable window;
// the band spans windows N/4, N/2, N.
DixmierValue dixmier_lhs(const GridModel& model, const GridFunction& f, int l);
DixmierValue dixmier_from_spectrum(const SingularSpectrum& s, int n);

struct YSymbolSet {
    int l = 1;
    int K = 0;
    std::vector<FiberOperator> y;  // k = 0..2n
};

// y_0 = H^{-1/2} (x) 1, y_k = y_0 (r_l a_k)^*.
YSymbolSet build_y_fibers(const BasisPtr& basis, int l);

// sum_points cell_volume * || sum_k f_k(g) y_k ||_{S_{2n+2}}^{2n+2},
// f_0 = X_l f and f_k = X_k f.
double bochner_rhs(const GridModel& model, const GridFunction& f, const YSymbolSet& y);
// Same quantity from the x_k set (x_l = y_l + y_0, x_k = y_k otherwise).
double bochner_rhs_x(const GridModel& model, const GridFunction& f, const YSymbolSet& y);

struct GramReport {
    CMatrix gram;
    double min_eigenvalue = 0.0;
    bool independent = false;  // min eigenvalue above 1e-12
    // min over sampled real coefficient vectors a of
    // ||sum a_k y_k||_{S_{2n+2}} / sum |a_k|.
    double coercivity = 0.0;
};

GramReport gram_min_eigenvalue(const std::vector<FiberOperator>& y, int samples = 4000, std::uint64_t seed = 42);
inline GramReport gram_min_eigenvalue(const YSymbolSet& y) { return gram_min_eigenvalue(y.y); }

ExperimentReport trace_formula_experiment(const GridModel& model, const std::vector<SampledFunction>& family, int l,
                                          const BasisPtr& basis, ExecutionPolicy policy = {});

// Operators usable in the product check. Names: "y0", "riesz:<l>", "a:<k>",
// and "identity" (fiber only).
GridOperator product_grid_operator(const GridModel& model, const std::string& name);
FiberOperator product_fiber_operator(const BasisPtr& basis, const std::string& name);

struct ProductTuple {
    std::string id;
    std::vector<SampledFunction> f;  // 2n + 2 entries
    std::vector<std::string> x;      // 2n + 2 entries
};

// (int conj(f1) f2 conj(f3) f4 ...) * Tr (x) Sigma(x1^* x2 x3^* x4 ...).
double product_rhs(const GridSpec& spec, const ProductTuple& t, const BasisPtr& basis);
// Dixmier approximant of A1^* A2 A3^* A4 with A_k = M_{f_k} G_{x_k}, on eigenvalues.
double product_lhs(const GridModel& model, const ProductTuple& t);

ExperimentReport product_trace_check(const GridModel& model, const std::vector<ProductTuple>& tuples,
                                     const BasisPtr& basis);

}  // namespace heislab
