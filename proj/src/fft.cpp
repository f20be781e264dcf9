#include "fft.hpp"

#include <mutex>
#include <numbers>

namespace spinn::detail {

namespace {
// FFTW planning is not thread-safe.
std::mutex& plan_mutex()
{
    static std::mutex m;
    return m;
}
} // namespace

ComplexFft::ComplexFft(int n) : n_(n), buf_(static_cast<std::size_t>(n))
{
    std::lock_guard lock(plan_mutex());
    auto* data = reinterpret_cast<fftw_complex*>(buf_.data());
    fwd_ = fftw_plan_dft_1d(n, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_1d(n, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
}

ComplexFft::~ComplexFft()
{
    std::lock_guard lock(plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
}

void ComplexFft::forward() { fftw_execute(fwd_); }

void ComplexFft::inverse()
{
    fftw_execute(inv_);
    const double s = 1.0 / n_;
    for (auto& c : buf_) c *= s;
}

std::vector<double> wavenumbers(int n, double length)
{
    std::vector<double> k(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const int m = j <= n / 2 ? j : j - n;
        k[static_cast<std::size_t>(j)] = 2.0 * std::numbers::pi * m / length;
    }
    return k;
}

} // namespace spinn::detail
