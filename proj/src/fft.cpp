#include "qwo/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace qwo::fft {
namespace {

// Plans are created once per shape under a lock; fftw_execute_dft on a cached
// plan is thread-safe. FFTW_UNALIGNED keeps execution independent of the
// buffer address, so results are reproducible bit for bit.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(std::size_t n, std::size_t rank, int axis, int sign) {
        const auto key = std::make_tuple(n, rank, axis, sign);
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        std::size_t total = 1;
        for (std::size_t r = 0; r < rank; ++r) total *= n;
        std::vector<fftw_complex> scratch(total);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_plan plan = nullptr;
        if (axis < 0) {
            std::vector<int> dims(rank, static_cast<int>(n));
            plan = fftw_plan_dft(static_cast<int>(rank), dims.data(), scratch.data(),
                                 scratch.data(), sign, flags);
        } else {
            // Loop over the axes before (outer) and after (inner) the
            // transformed one.
            std::size_t stride = 1;
            for (std::size_t r = static_cast<std::size_t>(axis) + 1; r < rank; ++r) stride *= n;
            std::size_t outer = 1;
            for (int r = 0; r < axis; ++r) outer *= n;
            fftw_iodim dim{static_cast<int>(n), static_cast<int>(stride), static_cast<int>(stride)};
            fftw_iodim loops[2] = {
                {static_cast<int>(outer), static_cast<int>(stride * n), static_cast<int>(stride * n)},
                {static_cast<int>(stride), 1, 1},
            };
            plan = fftw_plan_guru_dft(1, &dim, 2, loops, scratch.data(), scratch.data(), sign,
                                      flags);
        }
        if (plan == nullptr) throw std::runtime_error("fftw planning failed");
        plans_.emplace(key, plan);
        return plan;
    }

    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<std::size_t, std::size_t, int, int>, fftw_plan> plans_;
};

fftw_complex* as_fftw(std::span<std::complex<double>> data) {
    return reinterpret_cast<fftw_complex*>(data.data());
}

int sign_of(Direction dir) { return dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD; }

}  // namespace

void transform(std::span<std::complex<double>> data, std::size_t n, std::size_t rank,
               Direction dir) {
    auto plan = PlanCache::instance().get(n, rank, -1, sign_of(dir));
    fftw_execute_dft(plan, as_fftw(data), as_fftw(data));
}

void transform_axis(std::span<std::complex<double>> data, std::size_t n, std::size_t rank,
                    std::size_t axis, Direction dir) {
    if (axis >= rank) throw std::out_of_range("fft axis out of range");
    if (rank == 1) return transform(data, n, 1, dir);
    auto plan = PlanCache::instance().get(n, rank, static_cast<int>(axis), sign_of(dir));
    fftw_execute_dft(plan, as_fftw(data), as_fftw(data));
}

}  // namespace qwo::fft
