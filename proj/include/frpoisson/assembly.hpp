#pragma once

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "frlap_kernel.hpp"
#include "lattice.hpp"

namespace frp {

/// Dense collocation matrix a_jk = frlap_gaussian(order, eps, |x_j - x_k|).
struct DenseStiffness {
    LatticeGrid grid;
    FracOrder order;
    double eps = 1.0;
    Eigen::MatrixXd a;
    std::size_t n() const { return static_cast<std::size_t>(a.rows()); }
};

namespace detail {

/// Values of frlap_gaussian keyed by the integer squared lattice distance.
class DistanceCache {
public:
    DistanceCache(const FracOrder& o, double eps, double h, const SeriesControl& ctrl)
        : order_(o), eps_(eps), h_(h), ctrl_(ctrl) {}

    double operator()(long long q) {
        auto it = cache_.find(q);
        if (it != cache_.end()) return it->second;
        double v = frlap_gaussian(order_, eps_, h_ * std::sqrt(static_cast<double>(q)), ctrl_);
        cache_.emplace(q, v);
        return v;
    }

    std::size_t distinct() const { return cache_.size(); }

private:
    FracOrder order_;
    double eps_, h_;
    SeriesControl ctrl_;
    std::unordered_map<long long, double> cache_;
};

inline void check_grid_order(const LatticeGrid& g, const FracOrder& o) {
    if (g.size() == 0) throw UsageError("assembly: empty grid");
    if (g.dim != o.dim) throw UsageError("assembly: grid dimension differs from FracOrder.dim");
}

[[noreturn]] inline void rethrow_with_entry(const NumericalError& e, std::size_t j, std::size_t k) {
    const std::string where = std::string(e.what()) + " [entry " + std::to_string(j) + "," + std::to_string(k) + "]";
    if (dynamic_cast<const AccuracyLossError*>(&e)) throw AccuracyLossError(where);
    if (dynamic_cast<const OverflowError*>(&e)) throw OverflowError(where);
    throw NumericalError(where);
}

}  // namespace detail

inline DenseStiffness assemble_dense(const LatticeGrid& g, const FracOrder& o, double eps,
                                     const SeriesControl& ctrl = {}) {
    detail::check_grid_order(g, o);
    const std::size_t n = g.size();
    detail::DistanceCache cache(o, eps, g.h, ctrl);
    DenseStiffness s{g, o, eps, {}};
    s.a.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j; k < n; ++k) {
            long long q = 0;
            for (int a = 0; a < g.dim; ++a) {
                long long d = g.index(j)[a] - g.index(k)[a];
                q += d * d;
            }
            double v = 0.0;
            try {
                v = cache(q);
            } catch (const NumericalError& e) {
                detail::rethrow_with_entry(e, j, k);
            }
            s.a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = v;
            s.a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return s;
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwPlanDeleter {
    void operator()(fftw_plan_s* p) const {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(p);
    }
};

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

}  // namespace detail

/// Multidimensional real FFT pair (r2c / c2r) of fixed shape. Plans are
/// created once under a global lock; every transform runs on caller-owned
/// buffers through the new-array interface, so one instance may be used from
/// several threads at the same time.
class RealFft {
public:
    RealFft() = default;

    explicit RealFft(std::vector<int> shape) : shape_(std::move(shape)) {
        real_size_ = 1;
        for (int s : shape_) real_size_ *= static_cast<std::size_t>(s);
        complex_size_ = real_size_ / static_cast<std::size_t>(shape_.back()) * (static_cast<std::size_t>(shape_.back()) / 2 + 1);
        auto in = make_real();
        auto out = make_complex();
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        const int rank = static_cast<int>(shape_.size());
        fftw_plan f = fftw_plan_dft_r2c(rank, shape_.data(), in.get(), out.get(), FFTW_ESTIMATE);
        fftw_plan b = fftw_plan_dft_c2r(rank, shape_.data(), out.get(), in.get(), FFTW_ESTIMATE);
        if (!f || !b) throw NumericalError("RealFft: FFTW plan creation failed");
        forward_ = std::shared_ptr<fftw_plan_s>(f, detail::FftwPlanDeleter{});
        backward_ = std::shared_ptr<fftw_plan_s>(b, detail::FftwPlanDeleter{});
    }

    using RealBuf = std::unique_ptr<double[], detail::FftwFree>;
    using ComplexBuf = std::unique_ptr<fftw_complex[], detail::FftwFree>;

    RealBuf make_real() const {
        return RealBuf(static_cast<double*>(fftw_malloc(sizeof(double) * real_size_)));
    }
    ComplexBuf make_complex() const {
        return ComplexBuf(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * complex_size_)));
    }

    void forward(double* in, fftw_complex* out) const { fftw_execute_dft_r2c(forward_.get(), in, out); }
    /// Unnormalised inverse; destroys `in`.
    void backward(fftw_complex* in, double* out) const { fftw_execute_dft_c2r(backward_.get(), in, out); }

    const std::vector<int>& shape() const { return shape_; }
    std::size_t real_size() const { return real_size_; }
    std::size_t complex_size() const { return complex_size_; }

private:
    std::vector<int> shape_;
    std::size_t real_size_ = 0, complex_size_ = 0;
    std::shared_ptr<fftw_plan_s> forward_, backward_;
};

/// Masked multilevel symmetric Toeplitz form of the collocation matrix: a
/// kernel tensor over integer differences, the set of active block points,
/// and the cached spectrum of the circulant embedding.
class ToeplitzStiffness {
public:
    ToeplitzStiffness(const LatticeGrid& g, const FracOrder& o, double eps, bool pad_pow2 = false,
                      const SeriesControl& ctrl = {})
        : grid_(g), order_(o), eps_(eps), dim_(g.dim), level_sizes_(g.extents), grid_indices_(g.indices),
          block_lo_(g.block_lo) {
        detail::check_grid_order(g, o);
        // kernel tensor over differences in [-(n_i-1), n_i-1]
        std::vector<long> klo(dim_), khi(dim_);
        kernel_extents_.resize(dim_);
        for (int a = 0; a < dim_; ++a) {
            klo[a] = -(level_sizes_[a] - 1);
            khi[a] = level_sizes_[a] - 1;
            kernel_extents_[a] = 2 * level_sizes_[a] - 1;
        }
        detail::DistanceCache cache(o, eps, g.h, ctrl);
        detail::for_each_index(klo, khi, [&](const std::vector<long>& d) {
            long long q = 0;
            for (long v : d) q += static_cast<long long>(v) * v;
            try {
                kernel_.push_back(cache(q));
            } catch (const NumericalError& e) {
                detail::rethrow_with_entry(e, 0, static_cast<std::size_t>(kernel_.size()));
            }
        });

        mask_.assign(g.block_size(), 0);
        for (std::size_t p : g.block_pos) mask_[p] = 1;
        active_ = g.block_pos;

        std::vector<int> shape(dim_);
        for (int a = 0; a < dim_; ++a) {
            long m = 2 * level_sizes_[a];
            if (pad_pow2) m = static_cast<long>(std::bit_ceil(static_cast<unsigned long>(m)));
            shape[a] = static_cast<int>(m);
        }
        fft_ = RealFft(shape);

        // active point -> position in the embedded array
        embed_pos_.resize(active_.size());
        for (std::size_t i = 0; i < active_.size(); ++i) {
            std::size_t pos = 0;
            for (int a = 0; a < dim_; ++a)
                pos = pos * static_cast<std::size_t>(shape[a]) +
                      static_cast<std::size_t>(grid_indices_[i * dim_ + a] - block_lo_[a]);
            embed_pos_[i] = pos;
        }

        // spectrum of the circulant whose first column carries the kernel
        auto c = fft_.make_real();
        std::fill(c.get(), c.get() + fft_.real_size(), 0.0);
        std::vector<long> zlo(dim_, 0), zhi(dim_);
        for (int a = 0; a < dim_; ++a) zhi[a] = shape[a] - 1;
        std::vector<long> diff(dim_);
        std::size_t lin = 0;
        detail::for_each_index(zlo, zhi, [&](const std::vector<long>& j) {
            bool inside = true;
            for (int a = 0; a < dim_ && inside; ++a) {
                if (j[a] < level_sizes_[a]) diff[a] = j[a];
                else if (j[a] > shape[a] - level_sizes_[a]) diff[a] = j[a] - shape[a];
                else inside = false;
            }
            if (inside) c[lin] = kernel_at(diff.data());
            ++lin;
        });
        auto cf = fft_.make_complex();
        fft_.forward(c.get(), cf.get());
        spectrum_.resize(fft_.complex_size());
        const double scale = 1.0 / static_cast<double>(fft_.real_size());
        for (std::size_t i = 0; i < spectrum_.size(); ++i) spectrum_[i] = cf[i][0] * scale;
    }

    const LatticeGrid& grid() const { return grid_; }
    const FracOrder& order() const { return order_; }
    double eps() const { return eps_; }
    int dim() const { return dim_; }
    std::size_t size() const { return active_.size(); }
    const std::vector<long>& level_sizes() const { return level_sizes_; }
    const std::vector<long>& kernel_extents() const { return kernel_extents_; }
    const std::vector<double>& kernel() const { return kernel_; }
    const std::vector<char>& mask() const { return mask_; }
    const std::vector<int>& embedding_shape() const { return fft_.shape(); }
    /// Real spectrum of the embedding, already divided by the FFT length.
    const std::vector<double>& circulant_spectrum() const { return spectrum_; }

    double kernel_at(const long* diff) const {
        std::size_t pos = 0;
        for (int a = 0; a < dim_; ++a)
            pos = pos * static_cast<std::size_t>(kernel_extents_[a]) + static_cast<std::size_t>(diff[a] + level_sizes_[a] - 1);
        return kernel_[pos];
    }

    /// y = A v through scatter, circulant convolution and gather.
    void matvec(const double* v, double* y) const {
        auto x = fft_.make_real();
        auto xf = fft_.make_complex();
        std::fill(x.get(), x.get() + fft_.real_size(), 0.0);
        for (std::size_t i = 0; i < embed_pos_.size(); ++i) x[embed_pos_[i]] = v[i];
        fft_.forward(x.get(), xf.get());
        for (std::size_t i = 0; i < spectrum_.size(); ++i) {
            xf[i][0] *= spectrum_[i];
            xf[i][1] *= spectrum_[i];
        }
        fft_.backward(xf.get(), x.get());
        for (std::size_t i = 0; i < embed_pos_.size(); ++i) y[i] = x[embed_pos_[i]];
    }

    Eigen::VectorXd matvec(const Eigen::VectorXd& v) const {
        if (static_cast<std::size_t>(v.size()) != size())
            throw UsageError("toeplitz_matvec: vector length " + std::to_string(v.size()) + " differs from " +
                             std::to_string(size()));
        Eigen::VectorXd y(v.size());
        matvec(v.data(), y.data());
        return y;
    }

    Eigen::MatrixXd to_dense() const {
        const std::size_t n = size();
        Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        std::vector<long> diff(dim_);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                for (int d = 0; d < dim_; ++d) diff[d] = grid_indices_[j * dim_ + d] - grid_indices_[k * dim_ + d];
                a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = kernel_at(diff.data());
            }
        return a;
    }

    /// Multi-index (absolute lattice index) of active point i.
    const long* active_index(std::size_t i) const { return grid_indices_.data() + i * static_cast<std::size_t>(dim_); }
    const std::vector<long>& block_lo() const { return block_lo_; }

private:
    LatticeGrid grid_;
    FracOrder order_;
    double eps_;
    int dim_;
    std::vector<long> level_sizes_, kernel_extents_;
    std::vector<long> grid_indices_, block_lo_;
    std::vector<double> kernel_;
    std::vector<char> mask_;
    std::vector<std::size_t> active_, embed_pos_;
    std::vector<double> spectrum_;
    RealFft fft_;
};

inline ToeplitzStiffness assemble_toeplitz(const LatticeGrid& g, const FracOrder& o, double eps, bool pad_pow2 = false,
                                           const SeriesControl& ctrl = {}) {
    return ToeplitzStiffness(g, o, eps, pad_pow2, ctrl);
}

inline Eigen::VectorXd toeplitz_matvec(const ToeplitzStiffness& op, const Eigen::VectorXd& v) { return op.matvec(v); }

/// Binary dump of the kernel tensor: uint64 dim, dim x uint64 level sizes,
/// then prod(2 n_i - 1) little-endian doubles (row-major, axis 0 slowest).
inline void write_kernel_dump(const ToeplitzStiffness& op, const std::string& path) {
    static_assert(std::endian::native == std::endian::little, "kernel dump assumes a little-endian host");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("write_kernel_dump: cannot open " + path);
    std::uint64_t d = static_cast<std::uint64_t>(op.dim());
    out.write(reinterpret_cast<const char*>(&d), sizeof d);
    for (long n : op.level_sizes()) {
        std::uint64_t v = static_cast<std::uint64_t>(n);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    out.write(reinterpret_cast<const char*>(op.kernel().data()),
              static_cast<std::streamsize>(sizeof(double) * op.kernel().size()));
}

struct KernelDump {
    std::vector<long> level_sizes;
    std::vector<double> kernel;
};

inline KernelDump read_kernel_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("read_kernel_dump: cannot open " + path);
    KernelDump k;
    std::uint64_t d = 0;
    in.read(reinterpret_cast<char*>(&d), sizeof d);
    std::size_t total = 1;
    for (std::uint64_t i = 0; i < d; ++i) {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        k.level_sizes.push_back(static_cast<long>(v));
        total *= 2 * v - 1;
    }
    k.kernel.resize(total);
    in.read(reinterpret_cast<char*>(k.kernel.data()), static_cast<std::streamsize>(sizeof(double) * total));
    if (!in) throw UsageError("read_kernel_dump: truncated file " + path);
    return k;
}

}  // namespace frp
