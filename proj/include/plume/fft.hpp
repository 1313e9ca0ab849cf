#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <cstdlib>
#include <map>
#include <mutex>
#include <new>
#include <stdexcept>
#include <vector>

namespace plume {

/// STL allocator pinning every transform buffer to one 64-byte alignment
/// class. FFTW selects SIMD kernels by buffer alignment at planning time;
/// holding the class fixed keeps plans interchangeable across arrays and,
/// with it, the transform bit-reproducible across field instances.
template <class T>
struct FftwAllocator {
    using value_type = T;
    static constexpr std::size_t kAlign = 64;
    FftwAllocator() = default;
    template <class U>
    FftwAllocator(const FftwAllocator<U>&) {}
    T* allocate(std::size_t n) {
        const std::size_t bytes = (n * sizeof(T) + kAlign - 1) / kAlign * kAlign;
        void* p = std::aligned_alloc(kAlign, bytes);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) { std::free(p); }
    template <class U>
    bool operator==(const FftwAllocator<U>&) const { return true; }
};

using AlignedComplexVector = std::vector<std::complex<double>, FftwAllocator<std::complex<double>>>;

/// In-place complex FFT on an n x n grid, n a power of two, backed by FFTW.
///
/// inverse() computes X[j] = sum_m x[m] exp(+2*pi*i*j*m/n) per axis -- the
/// unnormalized synthesis turning Fourier coefficients (usual FFT index
/// order) into grid samples; forward() is the matching analysis including
/// the 1/n^2 factor. Arrays passed to the transforms must come from
/// AlignedComplexVector.
///
/// Plans are created once per size and shared for the process lifetime:
/// every instance executes the same plan object, which makes the transform
/// bit-identical across field instances and runs (FFTW's planner is free to
/// pick different kernels per planning call, and its planner API is not
/// thread-safe anyway, so creation sits behind a process-wide mutex).
/// Execution itself is concurrency-safe.
class Fft2 {
public:
    explicit Fft2(int n) : n_(n) {
        if (n < 2 || (n & (n - 1)) != 0)
            throw std::invalid_argument("Fft2: size must be a power of two >= 2");
        const PlanPair& plans = shared_plans(n);
        inv_ = plans.inv;
        fwd_ = plans.fwd;
    }

    int size() const { return n_; }

    void inverse(std::complex<double>* data) const {
        auto* p = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(inv_, p, p);
    }

    void forward(std::complex<double>* data) const {
        auto* p = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(fwd_, p, p);
        const double s = 1.0 / (static_cast<double>(n_) * n_);
        for (std::size_t i = 0; i < static_cast<std::size_t>(n_) * n_; ++i) data[i] *= s;
    }

private:
    struct PlanPair {
        fftw_plan inv = nullptr;
        fftw_plan fwd = nullptr;
    };

    static const PlanPair& shared_plans(int n) {
        static std::mutex mutex;
        static std::map<int, PlanPair> cache;
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(n);
        if (it != cache.end()) return it->second;
        AlignedComplexVector probe(static_cast<std::size_t>(n) * n);
        auto* p = reinterpret_cast<fftw_complex*>(probe.data());
        PlanPair plans;
        plans.inv = fftw_plan_dft_2d(n, n, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
        plans.fwd = fftw_plan_dft_2d(n, n, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        if (!plans.inv || !plans.fwd) throw std::runtime_error("Fft2: FFTW planning failed");
        return cache.emplace(n, plans).first->second;
    }

    int n_;
    fftw_plan inv_;
    fftw_plan fwd_;
};

}  // namespace plume
