#pragma once

// Distributional tests. Verdicts use alpha = 0.01 unless told otherwise;
// samples smaller than kMinSamples are reported as inconclusive.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qwo/grid.hpp"

namespace qwo {

inline constexpr double kAlpha = 0.01;
inline constexpr std::size_t kMinSamples = 100;

enum class Verdict { pass, fail, inconclusive };
const char* to_string(Verdict v);

struct TestReport {
    std::string name;
    std::string statistic_name;
    double statistic = 0.0;
    std::optional<double> p_value;
    double threshold = kAlpha;
    Verdict verdict = Verdict::inconclusive;
    std::vector<std::size_t> sample_sizes;
    std::uint64_t seed = 0;
    std::string note;

    bool passed() const { return verdict == Verdict::pass; }
};

// Kolmogorov distribution tail P(K > lambda).
double kolmogorov_tail(double lambda);

double ks_statistic(std::vector<double> a, std::vector<double> b);
// Asymptotic p-value with the usual small-sample correction.
double ks_p_value(double d, double effective_n);

// Pass means "consistent with equality" (p > alpha).
TestReport ks_two_sample(std::span<const double> a, std::span<const double> b,
                         std::string name = "ks_two_sample", double alpha = kAlpha);
TestReport ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf,
                         std::string name = "ks_one_sample", double alpha = kAlpha);

// Chi-square goodness of fit of counts against bin probabilities. Adjacent
// bins are pooled until every expected count is at least 5.
TestReport chi_square_counts(std::span<const double> observed, std::span<const double> expected_prob,
                             std::string name = "chi_square", double alpha = kAlpha);
// Equal-width bins over the density's domain; expected mass from its CDF.
TestReport chi_square_vs_density(std::span<const double> samples, const RealField1D& density,
                                 std::size_t bins, std::string name = "chi_square_vs_density",
                                 double alpha = kAlpha);
// Two-sample homogeneity on a shared binning.
TestReport chi_square_homogeneity(std::span<const double> counts_a, std::span<const double> counts_b,
                                  std::string name = "chi_square_homogeneity", double alpha = kAlpha);

double chi_square_tail(double statistic, double dof);

double pearson(std::span<const double> a, std::span<const double> b);

struct MeanStats {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double standard_error = 0.0;
};
MeanStats mean_stats(std::span<const double> x);

// Combined Bonferroni verdict over several reports at family level alpha.
TestReport combine_bonferroni(const std::vector<TestReport>& parts, std::string name,
                              double alpha = kAlpha);

}  // namespace qwo
