#include "rdd/numeric.hpp"

#include <cmath>
#include <stdexcept>

#include "rdd/kernels.hpp"

namespace rdd {

Matrix pool_mean_width(const Tensor& x) {
    Matrix out(x.channels, x.height);
    kernels::active().pool_mean_width(x.data.data(), x.channels, x.height, x.width,
                                      out.data.data());
    return out;
}

Matrix pool_mean_height(const Tensor& x) {
    Matrix out(x.channels, x.width);
    kernels::active().pool_mean_height(x.data.data(), x.channels, x.height, x.width,
                                       out.data.data());
    return out;
}

Matrix conv1x1(const Matrix& w, const Matrix& x, std::span<const double> bias) {
    if (w.cols != x.rows)
        throw ShapeError("conv1x1: inner dims disagree, w is " + std::to_string(w.rows) + "x" +
                         std::to_string(w.cols) + ", x is " + std::to_string(x.rows) + "x" +
                         std::to_string(x.cols));
    if (!bias.empty() && static_cast<int>(bias.size()) != w.rows)
        throw ShapeError("conv1x1: bias length " + std::to_string(bias.size()) +
                         " != output channels " + std::to_string(w.rows));
    Matrix out(w.rows, x.cols);
    kernels::active().matmul_bias(w.data.data(), x.data.data(),
                                  bias.empty() ? nullptr : bias.data(), w.rows, w.cols, x.cols,
                                  out.data.data());
    return out;
}

double activate(Activation kind, double t) {
    switch (kind) {
        case Activation::Sigmoid:
            return 1.0 / (1.0 + std::exp(-t));
        case Activation::HardSwish: {
            double c = t + 3.0;
            if (c < 0.0) c = 0.0;
            if (c > 6.0) c = 6.0;
            return t * c / 6.0;
        }
    }
    return 0.0;
}

double activate_grad(Activation kind, double t) {
    switch (kind) {
        case Activation::Sigmoid: {
            const double s = activate(Activation::Sigmoid, t);
            return s * (1.0 - s);
        }
        case Activation::HardSwish:
            if (t <= -3.0) return 0.0;
            if (t >= 3.0) return 1.0;
            return (2.0 * t + 3.0) / 6.0;
    }
    return 0.0;
}

void activate_inplace(Activation kind, std::span<double> v) {
    for (double& t : v) t = activate(kind, t);
}

Activation activation_from_string(const std::string& s) {
    if (s == "hard_swish") return Activation::HardSwish;
    if (s == "sigmoid") return Activation::Sigmoid;
    throw std::invalid_argument("unknown activation: " + s);
}

std::string to_string(Activation kind) {
    return kind == Activation::HardSwish ? "hard_swish" : "sigmoid";
}

GradCheckReport grad_check(const ScalarFn& f, std::span<const double> analytic_grad,
                           std::span<const double> point, double eps, double tol) {
    if (analytic_grad.size() != point.size())
        throw ShapeError("grad_check: gradient/point length mismatch");
    if (eps <= 0.0) throw std::invalid_argument("grad_check: eps must be > 0");

    GradCheckReport rep;
    rep.n_probes = static_cast<int>(point.size());
    std::vector<double> p(point.begin(), point.end());
    for (size_t i = 0; i < p.size(); ++i) {
        const double orig = p[i];
        p[i] = orig + eps;
        const double fp = f(p);
        p[i] = orig - eps;
        const double fm = f(p);
        p[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            rep.pass = false;
            rep.max_rel_err = std::numeric_limits<double>::infinity();
            rep.note = "non-finite f at probe coordinate " + std::to_string(i);
            return rep;
        }
        const double numeric = (fp - fm) / (2.0 * eps);
        const double analytic = analytic_grad[i];
        const double abs_err = std::abs(numeric - analytic);
        const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
        rep.max_abs_err = std::max(rep.max_abs_err, abs_err);
        rep.max_rel_err = std::max(rep.max_rel_err, abs_err / denom);
    }
    rep.pass = rep.max_rel_err <= tol;
    return rep;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

double Rng::gamma(double shape) {
    if (shape < 1.0) {
        // Boost to shape+1 then scale back.
        const double u = uniform();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Rng::beta(double a, double b) {
    const double ga = gamma(a);
    const double gb = gamma(b);
    return ga / (ga + gb);
}

}  // namespace rdd
