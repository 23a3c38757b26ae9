#pragma once

// Scalar-generic kernels shared by the long double and the extended-precision
// evaluation paths.  Not part of the public interface.

#include <cmath>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "clickpol/numeric.hpp"
#include "clickpol/polarization.hpp"

namespace clickpol::detail {

/// 200 significant decimal digits: enough headroom for the alternating sums at N = 128.
using Precise = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>,
                                              boost::multiprecision::et_off>;

template <typename T>
class Accumulator {
public:
    void add(const T& x) {
        if constexpr (std::is_floating_point_v<T>)
            compensated_ += x;
        else
            plain_ += x;
    }
    T value() const {
        if constexpr (std::is_floating_point_v<T>)
            return compensated_.value();
        else
            return plain_;
    }

private:
    CompensatedSum<std::conditional_t<std::is_floating_point_v<T>, T, double>> compensated_;
    T plain_{0};
};

/// Pascal triangle rows 0..n in T (exact for Precise at every supported n).
template <typename T>
std::vector<std::vector<T>> pascal(int n) {
    std::vector<std::vector<T>> rows(static_cast<std::size_t>(n) + 1);
    for (int r = 0; r <= n; ++r) {
        auto& row = rows[static_cast<std::size_t>(r)];
        row.assign(static_cast<std::size_t>(r) + 1, T(1));
        for (int k = 1; k < r; ++k)
            row[static_cast<std::size_t>(k)] =
                rows[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(k - 1)] +
                rows[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(k)];
    }
    return rows;
}

template <typename T>
struct Complex {
    T re{0};
    T im{0};
};

template <typename T>
Complex<T> operator*(const Complex<T>& a, const Complex<T>& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <typename T>
Complex<T> operator+(const Complex<T>& a, const Complex<T>& b) {
    return {a.re + b.re, a.im + b.im};
}
template <typename T>
Complex<T> operator-(const Complex<T>& a, const Complex<T>& b) {
    return {a.re - b.re, a.im - b.im};
}
template <typename T>
Complex<T> scaled(const Complex<T>& a, const T& s) {
    return {a.re * s, a.im * s};
}
template <typename T>
Complex<T> conj(const Complex<T>& a) {
    return {a.re, -a.im};
}
template <typename T>
T norm(const Complex<T>& a) {
    return a.re * a.re + a.im * a.im;
}

/// Rescaled Bell-state kernel.  With V_A = (u, u_perp), V_B = (w, w_perp) and
/// L0 = [[0, l], [l e^{i phi}, 0]], C = V_A^dagger L0 V_B has entries
///   C00 = l (|rho|^2 - e |tau|^2),   C01 = l (1 + e) conj(rho tau),
///   C10 = l (1 + e) tau rho,         C11 = l (|tau|^2 - e |rho|^2),
/// and E = (1 - |l|^2)^2 / det(I - C'^dagger C') after scaling column 1 by
/// sqrt(1 - X_d) and row 1 by sqrt(1 - X_a).
template <typename T>
class BellKernel {
public:
    BellKernel(const BellStateParams& state, const MeasurementSetting& setting) {
        using std::cos;
        using std::sin;
        const Complex<T> tau{T(setting.tau.real()), T(setting.tau.imag())};
        const Complex<T> rho{T(setting.rho.real()), T(setting.rho.imag())};
        const Complex<T> lam{T(state.lambda().real()), T(state.lambda().imag())};
        const T phi(state.phi());
        const Complex<T> e{cos(phi), sin(phi)};
        const Complex<T> one{T(1), T(0)};
        const Complex<T> t2{norm(tau), T(0)};
        const Complex<T> r2{norm(rho), T(0)};
        c00_ = lam * (r2 - e * t2);
        c01_ = lam * (one + e) * conj(rho * tau);
        c10_ = lam * (one + e) * tau * rho;
        c11_ = lam * (t2 - e * r2);
        const T l2 = norm(lam);
        numerator_ = (T(1) - l2) * (T(1) - l2);
    }

    /// sa = sqrt(1 - X_a), sd = sqrt(1 - X_d).
    T operator()(const T& sa, const T& sd) const {
        if (sa == T(1) && sd == T(1)) return T(1);
        const Complex<T> c01 = scaled(c01_, sd);
        const Complex<T> c10 = scaled(c10_, sa);
        const Complex<T> c11 = scaled(c11_, sa * sd);
        const Complex<T> off = conj(c00_) * c01 + conj(c10) * c11;
        const T det = (T(1) - norm(c00_) - norm(c10)) * (T(1) - norm(c01) - norm(c11)) - norm(off);
        return numerator_ / det;
    }

private:
    Complex<T> c00_, c01_, c10_, c11_;
    T numerator_{1};
};

/// c_{k,l} = C(N,k) C(N,l) sum_{i,j} (-1)^{i+j} C(k,i) C(l,j) E(N-k+i, N-l+j),
/// evaluated arm by arm.  E is indexed e[m_a * (N+1) + m_b].
template <typename T>
std::vector<T> click_sums(int n, const std::vector<T>& e) {
    const auto binom = pascal<T>(n);
    const auto w = static_cast<std::size_t>(n + 1);
    std::vector<T> partial(w * w);  // partial[k][m_b]
    for (int k = 0; k <= n; ++k)
        for (int mb = 0; mb <= n; ++mb) {
            Accumulator<T> s;
            for (int i = 0; i <= k; ++i) {
                const T term = binom[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] *
                               e[static_cast<std::size_t>(n - k + i) * w + static_cast<std::size_t>(mb)];
                s.add(i % 2 == 0 ? term : T(-term));
            }
            partial[static_cast<std::size_t>(k) * w + static_cast<std::size_t>(mb)] = s.value();
        }
    std::vector<T> out(w * w);
    for (int k = 0; k <= n; ++k)
        for (int l = 0; l <= n; ++l) {
            Accumulator<T> s;
            for (int j = 0; j <= l; ++j) {
                const T term = binom[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)] *
                               partial[static_cast<std::size_t>(k) * w + static_cast<std::size_t>(n - l + j)];
                s.add(j % 2 == 0 ? term : T(-term));
            }
            out[static_cast<std::size_t>(k) * w + static_cast<std::size_t>(l)] =
                binom[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] *
                binom[static_cast<std::size_t>(n)][static_cast<std::size_t>(l)] * s.value();
        }
    return out;
}

/// <:pi_A^a pi_B^b:> = sum (-1)^{k_a+k_b} C(a,k_a) C(b,k_b) E(k_a, k_b) for a, b <= order.
/// E is indexed e[m_a * (order+1) + m_b].
template <typename T>
std::vector<T> moment_sums(int order, const std::vector<T>& e) {
    const auto binom = pascal<T>(order);
    const auto w = static_cast<std::size_t>(order + 1);
    std::vector<T> partial(w * w);  // partial[a][k_b]
    for (int a = 0; a <= order; ++a)
        for (int kb = 0; kb <= order; ++kb) {
            Accumulator<T> s;
            for (int ka = 0; ka <= a; ++ka) {
                const T term = binom[static_cast<std::size_t>(a)][static_cast<std::size_t>(ka)] *
                               e[static_cast<std::size_t>(ka) * w + static_cast<std::size_t>(kb)];
                s.add(ka % 2 == 0 ? term : T(-term));
            }
            partial[static_cast<std::size_t>(a) * w + static_cast<std::size_t>(kb)] = s.value();
        }
    std::vector<T> out(w * w);
    for (int a = 0; a <= order; ++a)
        for (int b = 0; b <= order; ++b) {
            Accumulator<T> s;
            for (int kb = 0; kb <= b; ++kb) {
                const T term = binom[static_cast<std::size_t>(b)][static_cast<std::size_t>(kb)] *
                               partial[static_cast<std::size_t>(a) * w + static_cast<std::size_t>(kb)];
                s.add(kb % 2 == 0 ? term : T(-term));
            }
            out[static_cast<std::size_t>(a) * w + static_cast<std::size_t>(b)] = s.value();
        }
    return out;
}

/// Worst-case growth of a unit error in E through the click sums:
/// (max_k C(N,k) 2^k)^2.
inline long double click_amplification(int n) {
    const auto& binom = binomials();
    long double best = 0.0L;
    for (int k = 0; k <= n; ++k) best = std::max(best, binom(n, k) * std::ldexp(1.0L, k));
    return best * best;
}

/// Same for the moment sums up to the given order: (2^order)^2.
inline long double moment_amplification(int order) { return std::ldexp(1.0L, 2 * order); }

/// Extended precision is used once long double roundoff (a few ulp per E)
/// could exceed 1e-13 after amplification.
inline bool needs_precise(long double amplification) {
    return amplification * 16.0L * std::numeric_limits<long double>::epsilon() > 1e-13L;
}

}  // namespace clickpol::detail
