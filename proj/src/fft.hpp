#pragma once

#include <complex>
#include <vector>

#include <fftw3.h>

namespace spinn::detail {

// In-place complex 1D transform pair on a fixed-size buffer. The inverse is
// normalized so that inverse(forward(x)) == x.
class ComplexFft {
public:
    explicit ComplexFft(int n);
    ~ComplexFft();
    ComplexFft(const ComplexFft&) = delete;
    ComplexFft& operator=(const ComplexFft&) = delete;

    [[nodiscard]] int size() const noexcept { return n_; }
    std::vector<std::complex<double>>& buffer() noexcept { return buf_; }
    void forward();
    void inverse();

private:
    int n_;
    std::vector<std::complex<double>> buf_;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
};

// Angular wavenumbers 2 pi k / L in FFT order; the Nyquist entry is returned
// as +pi n / L.
std::vector<double> wavenumbers(int n, double length);

} // namespace spinn::detail
