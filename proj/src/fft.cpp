#include "polycode/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace polycode {

double to_db20(double magnitude_ratio) {
    if (!(magnitude_ratio > 0.0)) return kDbFloor;
    return std::max(kDbFloor, 20.0 * std::log10(magnitude_ratio));
}

double to_db10(double power_ratio) {
    if (!(power_ratio > 0.0)) return kDbFloor;
    return std::max(kDbFloor, 10.0 * std::log10(power_ratio));
}

double wrap_phase(double radians) {
    double r = std::fmod(radians, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

namespace fft {
namespace {

std::mutex plan_mutex;
std::map<std::pair<std::size_t, int>, fftw_plan> plan_cache;

fftw_plan plan_for(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end()) return it->second;
    fftw_complex* buf = fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    plan_cache.emplace(key, p);
    return p;
}

CVector run(std::span<const cplx> in, std::size_t n, int sign) {
    CVector out(n, cplx{0.0, 0.0});
    std::copy_n(in.begin(), std::min(n, in.size()), out.begin());
    if (n == 0) return out;
    auto* data = reinterpret_cast<fftw_complex*>(out.data());
    fftw_execute_dft(plan_for(n, sign), data, data);
    return out;
}

}  // namespace

CVector forward(std::span<const cplx> in, std::size_t n) {
    return run(in, n, FFTW_FORWARD);
}

CVector inverse(std::span<const cplx> in) {
    CVector out = run(in, in.size(), FFTW_BACKWARD);
    const double scale = out.empty() ? 1.0 : 1.0 / static_cast<double>(out.size());
    for (auto& v : out) v *= scale;
    return out;
}

std::size_t good_size(std::size_t n) {
    if (n <= 1) return 1;
    for (std::size_t m = n;; ++m) {
        std::size_t r = m;
        for (std::size_t f : {2u, 3u, 5u})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

}  // namespace fft
}  // namespace polycode
