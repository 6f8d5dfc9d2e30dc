#include "qwo/stats.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "qwo/sampling.hpp"

namespace qwo {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

double kolmogorov_tail(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // P(K <= lambda) = sqrt(2 pi)/lambda sum exp(-(2k-1)^2 pi^2 / (8 lambda^2))
        const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double s = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double term = std::exp(c * (2 * k - 1) * (2 * k - 1));
            s += term;
            if (term < 1e-17) break;
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? 1.0 : -1.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_p_value(double d, double effective_n) {
    const double s = std::sqrt(effective_n);
    return kolmogorov_tail((s + 0.12 + 0.11 / s) * d);
}

namespace {

TestReport finish(TestReport r, std::size_t smallest, double alpha) {
    r.threshold = alpha;
    if (smallest < kMinSamples) {
        r.verdict = Verdict::inconclusive;
        r.note = "fewer than " + std::to_string(kMinSamples) + " samples; under-powered";
    } else {
        r.verdict = r.p_value && *r.p_value > alpha ? Verdict::pass : Verdict::fail;
        r.note = r.verdict == Verdict::pass ? "consistent with equality" : "rejected at alpha";
    }
    return r;
}

}  // namespace

TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, std::string name,
                         double alpha) {
    TestReport r;
    r.name = std::move(name);
    r.statistic_name = "ks_D";
    r.sample_sizes = {a.size(), b.size()};
    if (a.empty() || b.empty()) return finish(r, 0, alpha);
    r.statistic = ks_statistic({a.begin(), a.end()}, {b.begin(), b.end()});
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    r.p_value = ks_p_value(r.statistic, na * nb / (na + nb));
    return finish(r, std::min(a.size(), b.size()), alpha);
}

TestReport ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf,
                         std::string name, double alpha) {
    TestReport r;
    r.name = std::move(name);
    r.statistic_name = "ks_D";
    r.sample_sizes = {samples.size()};
    if (samples.empty()) return finish(r, 0, alpha);
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    r.statistic = d;
    r.p_value = ks_p_value(d, n);
    return finish(r, s.size(), alpha);
}

double chi_square_tail(double statistic, double dof) {
    if (dof <= 0.0) return 1.0;
    if (statistic <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

TestReport chi_square_counts(std::span<const double> observed, std::span<const double> expected_prob,
                             std::string name, double alpha) {
    if (observed.size() != expected_prob.size())
        throw std::invalid_argument("chi_square: bin count mismatch");
    TestReport r;
    r.name = std::move(name);
    r.statistic_name = "chi2";
    double n = 0.0, ptot = 0.0;
    for (double o : observed) n += o;
    for (double p : expected_prob) ptot += p;
    r.sample_sizes = {static_cast<std::size_t>(n)};
    if (!(ptot > 0.0)) throw std::invalid_argument("chi_square: expected probabilities vanish");

    std::vector<double> obs, exp;
    double o_acc = 0.0, e_acc = 0.0;
    for (std::size_t b = 0; b < observed.size(); ++b) {
        o_acc += observed[b];
        e_acc += n * expected_prob[b] / ptot;
        if (e_acc >= 5.0) {
            obs.push_back(o_acc);
            exp.push_back(e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (exp.empty()) {
            obs.push_back(o_acc);
            exp.push_back(e_acc);
        } else {
            obs.back() += o_acc;
            exp.back() += e_acc;
        }
    }
    double chi2 = 0.0;
    for (std::size_t b = 0; b < obs.size(); ++b) {
        if (exp[b] > 0.0) chi2 += (obs[b] - exp[b]) * (obs[b] - exp[b]) / exp[b];
        else if (obs[b] > 0.0) chi2 = std::numeric_limits<double>::infinity();
    }
    r.statistic = chi2;
    r.p_value = chi_square_tail(chi2, static_cast<double>(obs.size()) - 1.0);
    r.note = std::to_string(obs.size()) + " pooled bins";
    auto out = finish(r, static_cast<std::size_t>(n), alpha);
    if (obs.size() < 2) out.verdict = Verdict::inconclusive;
    return out;
}

TestReport chi_square_vs_density(std::span<const double> samples, const RealField1D& density,
                                 std::size_t bins, std::string name, double alpha) {
    if (bins < 2) throw std::invalid_argument("chi_square_vs_density: need at least 2 bins");
    const double width = density.length / static_cast<double>(bins);
    std::vector<double> counts(bins, 0.0), prob(bins);
    for (double x : samples) {
        double r = std::fmod(x - density.origin, density.length);
        if (r < 0.0) r += density.length;
        auto b = static_cast<std::size_t>(r / width);
        counts[std::min(b, bins - 1)] += 1.0;
    }
    double prev = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        const double hi = b + 1 == bins ? 1.0
                                        : density_cdf(density, density.origin + width * static_cast<double>(b + 1));
        prob[b] = std::max(0.0, hi - prev);
        prev = hi;
    }
    return chi_square_counts(counts, prob, std::move(name), alpha);
}

TestReport chi_square_homogeneity(std::span<const double> counts_a, std::span<const double> counts_b,
                                  std::string name, double alpha) {
    if (counts_a.size() != counts_b.size())
        throw std::invalid_argument("chi_square_homogeneity: bin count mismatch");
    TestReport r;
    r.name = std::move(name);
    r.statistic_name = "chi2";
    double na = 0.0, nb = 0.0;
    for (double c : counts_a) na += c;
    for (double c : counts_b) nb += c;
    r.sample_sizes = {static_cast<std::size_t>(na), static_cast<std::size_t>(nb)};
    if (!(na > 0.0) || !(nb > 0.0)) return finish(r, 0, alpha);
    std::vector<double> a, b;
    double aa = 0.0, bb = 0.0;
    const double fa = na / (na + nb), fb = nb / (na + nb);
    for (std::size_t k = 0; k < counts_a.size(); ++k) {
        aa += counts_a[k];
        bb += counts_b[k];
        if ((aa + bb) * std::min(fa, fb) >= 5.0) {
            a.push_back(aa);
            b.push_back(bb);
            aa = bb = 0.0;
        }
    }
    if (aa + bb > 0.0) {
        if (a.empty()) {
            a.push_back(aa);
            b.push_back(bb);
        } else {
            a.back() += aa;
            b.back() += bb;
        }
    }
    double chi2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double tot = a[k] + b[k];
        const double ea = tot * fa, eb = tot * fb;
        chi2 += (a[k] - ea) * (a[k] - ea) / ea + (b[k] - eb) * (b[k] - eb) / eb;
    }
    r.statistic = chi2;
    r.p_value = chi_square_tail(chi2, static_cast<double>(a.size()) - 1.0);
    r.note = std::to_string(a.size()) + " pooled bins";
    auto out = finish(r, static_cast<std::size_t>(std::min(na, nb)), alpha);
    if (a.size() < 2) out.verdict = Verdict::inconclusive;
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("pearson: need paired samples");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

MeanStats mean_stats(std::span<const double> x) {
    MeanStats s;
    if (x.empty()) return s;
    const double n = static_cast<double>(x.size());
    for (double v : x) s.mean += v;
    s.mean /= n;
    if (x.size() > 1) {
        for (double v : x) s.variance += (v - s.mean) * (v - s.mean);
        s.variance /= n - 1.0;
        s.standard_error = std::sqrt(s.variance / n);
    }
    return s;
}

TestReport combine_bonferroni(const std::vector<TestReport>& parts, std::string name, double alpha) {
    TestReport r;
    r.name = std::move(name);
    r.statistic_name = "min_p_times_m";
    r.threshold = alpha;
    double min_p = 1.0;
    bool inconclusive = parts.empty();
    for (const auto& p : parts) {
        for (auto n : p.sample_sizes) r.sample_sizes.push_back(n);
        if (p.verdict == Verdict::inconclusive || !p.p_value) inconclusive = true;
        else min_p = std::min(min_p, *p.p_value);
    }
    const double m = static_cast<double>(parts.size());
    r.statistic = std::min(1.0, min_p * m);
    r.p_value = r.statistic;
    if (inconclusive) {
        r.verdict = Verdict::inconclusive;
        r.note = "a component test was inconclusive";
    } else {
        r.verdict = r.statistic > alpha ? Verdict::pass : Verdict::fail;
        r.note = r.verdict == Verdict::pass ? "consistent with equality" : "rejected at alpha";
    }
    return r;
}

}  // namespace qwo
