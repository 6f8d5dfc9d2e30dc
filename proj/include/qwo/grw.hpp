#pragma once

// GRW jump process: Gaussian collapse operators, flash rate densities and
// the two samplers (collapsed state and linear state + Heisenberg factors).

#include <optional>
#include <vector>

#include "qwo/dynamics.hpp"
#include "qwo/grid.hpp"
#include "qwo/sampling.hpp"

namespace qwo {

struct TheoryParams {
    double lambda_rate = 1.0;
    double sigma = 0.5;
    // Optional per-label rates; empty means lambda_rate for every label.
    std::vector<double> per_label_rates;

    void validate(std::size_t n_labels) const;
    double rate(std::size_t axis) const {
        return per_label_rates.empty() ? lambda_rate : per_label_rates[axis];
    }
    double total_rate(std::size_t n_labels) const;
    std::vector<double> rates(std::size_t n_labels) const;
    friend bool operator==(const TheoryParams&, const TheoryParams&) = default;
};

// label is 1-based, as written to flash files.
struct Flash {
    double t = 0.0;
    double x = 0.0;
    int label = 1;

    std::size_t axis() const { return static_cast<std::size_t>(label - 1); }
    friend bool operator==(const Flash&, const Flash&) = default;
};

class FlashHistory {
public:
    FlashHistory() = default;
    explicit FlashHistory(std::vector<Flash> flashes);

    // Rejects times that do not strictly increase.
    void push(const Flash& f);
    const std::vector<Flash>& flashes() const { return flashes_; }
    std::size_t size() const { return flashes_.size(); }
    bool empty() const { return flashes_.empty(); }
    const Flash& operator[](std::size_t k) const { return flashes_[k]; }
    // Flashes with t <= time.
    FlashHistory until(double time) const;

    friend bool operator==(const FlashHistory&, const FlashHistory&) = default;

private:
    std::vector<Flash> flashes_;
};

// Lambda(x)^{1/2} psi along one axis, unnormalized. Lambda is the wrapped
// Gaussian normalized on the grid so that its x-integral is the identity.
ComplexField collapse_sqrt(const ComplexField& psi, std::size_t axis, double center,
                           double sigma);

// Normalized Lambda^{1/2} psi; NumericalFailure if its norm is <= 1e-12.
ComplexField apply_collapse(const ComplexField& psi, std::size_t axis, double center,
                            double sigma);

// x -> lambda_i <psi|Lambda_i(x) psi> / <psi|psi>.
RealField1D collapse_rate_density(const ComplexField& psi, std::size_t axis,
                                  const TheoryParams& params);

struct Checkpoint {
    double t;
    ComplexField psi;
    bool after_flash;
};

struct GrwOptions {
    std::size_t checkpoints = 20;  // uniform checkpoints on (t0, t_max]
    bool keep_checkpoints = true;
    std::optional<std::size_t> max_flashes;
};

struct GrwRun {
    FlashHistory history;
    std::vector<Checkpoint> checkpoints;  // includes t0 and every post-flash state
    ComplexField final_state;
    double t_end;
};

// Randomness is drawn per jump as: waiting time, label, center (2 uniforms).
GrwRun run_grw_collapse(const ComplexField& psi0, double t0, double t_max,
                        const Propagator& prop, const TheoryParams& params, Rng& rng,
                        const GrwOptions& options = {});

// Draws (label, center) for a jump from the given state; shared by every
// sampler so that coupled runs consume identical randomness.
Flash draw_flash(const ComplexField& psi, double t, const TheoryParams& params, Rng& rng);

// log of the joint density of the first n flashes; with t_end also the
// probability of no further flash up to t_end.
double flash_joint_log_density(const FlashHistory& history, const ComplexField& psi0,
                               double t0, const Propagator& prop, const TheoryParams& params,
                               std::optional<double> t_end = std::nullopt);
double flash_joint_density(const FlashHistory& history, const ComplexField& psi0, double t0,
                           const Propagator& prop, const TheoryParams& params,
                           std::optional<double> t_end = std::nullopt);

// U_{t-T} Lambda^{1/2}(x) U_{T-t}: a collapse factor moved to time t.
struct HeisenbergCollapse {
    std::size_t axis;
    double center;
    double flash_time;

    ComplexField apply(const ComplexField& psi, double eval_time, const Propagator& prop,
                       double sigma) const;
};

// Collapsed state at time t from the linearly evolved psiL_t and the
// flashes up to t (latest factor outermost), normalized.
ComplexField reconstruct_collapsed(const ComplexField& psiL_t, double t,
                                   const FlashHistory& history, const Propagator& prop,
                                   const TheoryParams& params);

struct LinearRun {
    FlashHistory history;
    ComplexField final_linear;
    double t_end;
};

LinearRun run_grw_linear(const ComplexField& psi0, double t0, double t_max,
                         const Propagator& prop, const TheoryParams& params, Rng& rng,
                         std::optional<std::size_t> max_flashes = std::nullopt);

// E[<H> after a collapse on `axis`] - <H>, averaging over collapse centres
// with their rate weights (grid quadrature).
double mean_collapse_energy_jump(const ComplexField& psi, std::size_t axis,
                                 const Propagator& prop, double sigma);

}  // namespace qwo
