#include "rdd/coord_attention.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rdd/kernels.hpp"

static_assert(std::endian::native == std::endian::little,
              "parameter files are little-endian; big-endian hosts need byte swaps");

namespace rdd::ca {

namespace {

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) t.at(c, r) = m.at(r, c);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) { return conv1x1(a, b, {}); }

// Forward intermediates kept around for the backward pass.
struct ForwardTrace {
    Matrix z_h;      // C x H
    Matrix z_w;      // C x W
    Matrix f_pre;    // c_mid x (H+W)
    Matrix f;        // c_mid x (H+W), post-activation
    Matrix ah_pre;   // C x H
    Matrix aw_pre;   // C x W
    Matrix g_h;      // C x H
    Matrix g_w;      // C x W
};

ForwardTrace run_forward(const Tensor& x, const CAParams& p) {
    if (x.channels != p.c_in)
        throw ShapeError("coord_attention: input has " + std::to_string(x.channels) +
                         " channels, params expect " + std::to_string(p.c_in));
    const int C = x.channels, H = x.height, W = x.width;

    ForwardTrace t;
    t.z_h = pool_mean_width(x);   // C x H
    t.z_w = pool_mean_height(x);  // C x W

    // u = [z_h || z_w], H block first, C x (H+W)
    Matrix u(C, H + W);
    for (int c = 0; c < C; ++c) {
        std::memcpy(u.row(c).data(), t.z_h.row(c).data(), sizeof(double) * H);
        std::memcpy(u.row(c).data() + H, t.z_w.row(c).data(), sizeof(double) * W);
    }

    t.f_pre = conv1x1(p.w_f1, u, p.b_f1);  // c_mid x (H+W)
    t.f = t.f_pre;
    activate_inplace(p.delta_kind, t.f.data);

    Matrix fh(p.c_mid, H), fw(p.c_mid, W);
    for (int r = 0; r < p.c_mid; ++r) {
        std::memcpy(fh.row(r).data(), t.f.row(r).data(), sizeof(double) * H);
        std::memcpy(fw.row(r).data(), t.f.row(r).data() + H, sizeof(double) * W);
    }

    t.ah_pre = conv1x1(p.w_fh, fh, p.b_fh);  // C x H
    t.aw_pre = conv1x1(p.w_fw, fw, p.b_fw);  // C x W
    t.g_h = t.ah_pre;
    activate_inplace(Activation::Sigmoid, t.g_h.data);
    t.g_w = t.aw_pre;
    activate_inplace(Activation::Sigmoid, t.g_w.data);
    return t;
}

}  // namespace

int mid_channels(int c_in, int reduction) { return std::max(1, c_in / reduction); }

CAParams init_params(int c_in, int reduction, uint64_t seed, Activation delta_kind) {
    if (c_in < 1 || reduction < 1)
        throw std::invalid_argument("init_params: c_in and reduction must be >= 1");
    CAParams p;
    p.c_in = c_in;
    p.reduction = reduction;
    p.c_mid = mid_channels(c_in, reduction);
    p.delta_kind = delta_kind;

    Rng rng(seed);
    auto fill = [&rng](Matrix& m, int fan_in) {
        const double k = std::sqrt(1.0 / fan_in);
        for (double& v : m.data) v = rng.uniform(-k, k);
    };
    p.w_f1 = Matrix(p.c_mid, c_in);
    fill(p.w_f1, c_in);
    p.b_f1.assign(p.c_mid, 0.0);
    p.w_fh = Matrix(c_in, p.c_mid);
    fill(p.w_fh, p.c_mid);
    p.b_fh.assign(c_in, 0.0);
    p.w_fw = Matrix(c_in, p.c_mid);
    fill(p.w_fw, p.c_mid);
    p.b_fw.assign(c_in, 0.0);
    return p;
}

CAOutput forward(const Tensor& x, const CAParams& p) {
    ForwardTrace t = run_forward(x, p);
    CAOutput out;
    out.y = Tensor(x.channels, x.height, x.width);
    kernels::active().gate_mul(x.data.data(), t.g_h.data.data(), t.g_w.data.data(), x.channels,
                               x.height, x.width, out.y.data.data());
    out.g_h = std::move(t.g_h);
    out.g_w = std::move(t.g_w);
    out.f = std::move(t.f);
    return out;
}

CAGradients backward(const Tensor& x, const CAParams& p, const Tensor& upstream) {
    if (!x.same_dims(upstream))
        throw ShapeError("coord_attention backward: upstream dims differ from input dims");
    const int C = x.channels, H = x.height, W = x.width;
    ForwardTrace t = run_forward(x, p);

    CAGradients g;
    g.grad_x = Tensor(C, H, W);

    // y_c(i,j) = x * g_h(c,i) * g_w(c,j)
    Matrix d_gh(C, H), d_gw(C, W);
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < H; ++i) {
            for (int j = 0; j < W; ++j) {
                const double up = upstream.at(c, i, j);
                const double xv = x.at(c, i, j);
                g.grad_x.at(c, i, j) = up * t.g_h.at(c, i) * t.g_w.at(c, j);
                d_gh.at(c, i) += up * xv * t.g_w.at(c, j);
                d_gw.at(c, j) += up * xv * t.g_h.at(c, i);
            }
        }
    }

    // through the sigmoids
    Matrix d_ah(C, H), d_aw(C, W);
    for (size_t i = 0; i < d_ah.data.size(); ++i)
        d_ah.data[i] = d_gh.data[i] * t.g_h.data[i] * (1.0 - t.g_h.data[i]);
    for (size_t i = 0; i < d_aw.data.size(); ++i)
        d_aw.data[i] = d_gw.data[i] * t.g_w.data[i] * (1.0 - t.g_w.data[i]);

    Matrix fh(p.c_mid, H), fw(p.c_mid, W);
    for (int r = 0; r < p.c_mid; ++r) {
        std::memcpy(fh.row(r).data(), t.f.row(r).data(), sizeof(double) * H);
        std::memcpy(fw.row(r).data(), t.f.row(r).data() + H, sizeof(double) * W);
    }

    g.grad_w_fh = matmul(d_ah, transpose(fh));  // C x c_mid
    g.grad_w_fw = matmul(d_aw, transpose(fw));
    g.grad_b_fh.assign(C, 0.0);
    g.grad_b_fw.assign(C, 0.0);
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < H; ++i) g.grad_b_fh[c] += d_ah.at(c, i);
        for (int j = 0; j < W; ++j) g.grad_b_fw[c] += d_aw.at(c, j);
    }

    Matrix d_fh = matmul(transpose(p.w_fh), d_ah);  // c_mid x H
    Matrix d_fw = matmul(transpose(p.w_fw), d_aw);  // c_mid x W

    // through delta, on the concatenated block
    Matrix d_fpre(p.c_mid, H + W);
    for (int r = 0; r < p.c_mid; ++r) {
        for (int i = 0; i < H; ++i)
            d_fpre.at(r, i) = d_fh.at(r, i) * activate_grad(p.delta_kind, t.f_pre.at(r, i));
        for (int j = 0; j < W; ++j)
            d_fpre.at(r, H + j) = d_fw.at(r, j) * activate_grad(p.delta_kind, t.f_pre.at(r, H + j));
    }

    Matrix u(C, H + W);
    for (int c = 0; c < C; ++c) {
        std::memcpy(u.row(c).data(), t.z_h.row(c).data(), sizeof(double) * H);
        std::memcpy(u.row(c).data() + H, t.z_w.row(c).data(), sizeof(double) * W);
    }
    g.grad_w_f1 = matmul(d_fpre, transpose(u));  // c_mid x C
    g.grad_b_f1.assign(p.c_mid, 0.0);
    for (int r = 0; r < p.c_mid; ++r)
        for (int k = 0; k < H + W; ++k) g.grad_b_f1[r] += d_fpre.at(r, k);

    Matrix d_u = matmul(transpose(p.w_f1), d_fpre);  // C x (H+W)

    // pooling spreads the gradient uniformly back over the pooled axis
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < H; ++i) {
            const double dzh = d_u.at(c, i) / W;
            for (int j = 0; j < W; ++j) g.grad_x.at(c, i, j) += dzh;
        }
        for (int j = 0; j < W; ++j) {
            const double dzw = d_u.at(c, H + j) / H;
            for (int i = 0; i < H; ++i) g.grad_x.at(c, i, j) += dzw;
        }
    }
    return g;
}

std::pair<const Matrix*, const Matrix*> attention_maps(const CAOutput& out) {
    return {&out.g_h, &out.g_w};
}

namespace {

void put_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
uint32_t get_u32(std::istream& is) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
void put_f64(std::ostream& os, std::span<const double> v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}
void get_f64(std::istream& is, std::span<double> v) {
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

constexpr uint32_t kVersion = 1;

}  // namespace

void save_params(const CAParams& p, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.write("CAPM", 4);
    put_u32(os, kVersion);
    put_u32(os, static_cast<uint32_t>(p.c_in));
    put_u32(os, static_cast<uint32_t>(p.reduction));
    put_u32(os, p.delta_kind == Activation::HardSwish ? 0u : 1u);
    put_f64(os, p.w_f1.data);
    put_f64(os, p.b_f1);
    put_f64(os, p.w_fh.data);
    put_f64(os, p.b_fh);
    put_f64(os, p.w_fw.data);
    put_f64(os, p.b_fw);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

CAParams load_params(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "CAPM", 4) != 0)
        throw std::runtime_error(path.string() + ": bad magic, not a CA parameter file");
    const uint32_t version = get_u32(is);
    if (version != kVersion)
        throw std::runtime_error(path.string() + ": unsupported version " + std::to_string(version));
    const int c_in = static_cast<int>(get_u32(is));
    const int r = static_cast<int>(get_u32(is));
    const uint32_t delta = get_u32(is);

    CAParams p;
    p.c_in = c_in;
    p.reduction = r;
    p.c_mid = mid_channels(c_in, r);
    p.delta_kind = delta == 0 ? Activation::HardSwish : Activation::Sigmoid;
    p.w_f1 = Matrix(p.c_mid, c_in);
    p.b_f1.resize(p.c_mid);
    p.w_fh = Matrix(c_in, p.c_mid);
    p.b_fh.resize(c_in);
    p.w_fw = Matrix(c_in, p.c_mid);
    p.b_fw.resize(c_in);
    get_f64(is, p.w_f1.data);
    get_f64(is, p.b_f1);
    get_f64(is, p.w_fh.data);
    get_f64(is, p.b_fh);
    get_f64(is, p.w_fw.data);
    get_f64(is, p.b_fw);
    if (!is) throw std::runtime_error(path.string() + ": truncated parameter file");
    return p;
}

std::vector<double> flatten(const CAParams& p) {
    std::vector<double> out;
    auto app = [&out](std::span<const double> v) { out.insert(out.end(), v.begin(), v.end()); };
    app(p.w_f1.data);
    app(p.b_f1);
    app(p.w_fh.data);
    app(p.b_fh);
    app(p.w_fw.data);
    app(p.b_fw);
    return out;
}

void unflatten(CAParams& p, std::span<const double> flat) {
    size_t off = 0;
    auto take = [&](std::span<double> dst) {
        std::memcpy(dst.data(), flat.data() + off, dst.size() * sizeof(double));
        off += dst.size();
    };
    take(p.w_f1.data);
    take(p.b_f1);
    take(p.w_fh.data);
    take(p.b_fh);
    take(p.w_fw.data);
    take(p.b_fw);
    if (off != flat.size()) throw ShapeError("unflatten: length mismatch");
}

std::vector<double> flatten_grads(const CAGradients& g) {
    std::vector<double> out;
    auto app = [&out](std::span<const double> v) { out.insert(out.end(), v.begin(), v.end()); };
    app(g.grad_w_f1.data);
    app(g.grad_b_f1);
    app(g.grad_w_fh.data);
    app(g.grad_b_fh);
    app(g.grad_w_fw.data);
    app(g.grad_b_fw);
    return out;
}

}  // namespace rdd::ca
