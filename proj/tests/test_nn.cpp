#include "radocc/errors.hpp"
#include "radocc/nn.hpp"
#include "radocc/rng.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>

using namespace radocc;
using namespace radocc::nn;
using Catch::Approx;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Central difference of f along each coordinate of x.
std::vector<double> numeric_grad(std::vector<double>& x, const std::function<double()>& f) {
    std::vector<double> g(x.size());
    const double h = 1e-6;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f();
        x[i] = keep - h;
        const double down = f();
        x[i] = keep;
        g[i] = (up - down) / (2 * h);
    }
    return g;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol = 1e-6) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == Approx(b[i]).margin(tol));
}

}  // namespace

TEST_CASE("conv identity kernel reproduces its input") {
    const int h = 5, w = 6;
    const auto in = random_vec(h * w, 1);
    std::vector<double> weight(9, 0.0), bias{0.25}, out(h * w), cols(9 * h * w);
    weight[4] = 1.0;
    conv3x3_forward(in.data(), 1, h, w, weight.data(), bias.data(), 1, out.data(), cols.data());
    for (int i = 0; i < h * w; ++i) CHECK(out[i] == Approx(in[i] + 0.25));
}

TEST_CASE("conv zero padding at the border") {
    std::vector<double> in(9, 1.0), weight(9, 1.0), bias{0.0}, out(9), cols(81);
    conv3x3_forward(in.data(), 1, 3, 3, weight.data(), bias.data(), 1, out.data(), cols.data());
    CHECK(out[0] == 4.0);
    CHECK(out[1] == 6.0);
    CHECK(out[4] == 9.0);
}

TEST_CASE("conv gradients match finite differences") {
    const int ci = 2, co = 3, h = 4, w = 6;
    auto in = random_vec(ci * h * w, 2);
    auto weight = random_vec(co * ci * 9, 3);
    auto bias = random_vec(co, 4);
    const auto probe = random_vec(co * h * w, 5);
    std::vector<double> out(co * h * w), cols(ci * 9 * h * w), scratch(cols.size());
    auto f = [&] {
        conv3x3_forward(in.data(), ci, h, w, weight.data(), bias.data(), co, out.data(), cols.data());
        return dot(out, probe);
    };
    f();
    std::vector<double> dw(weight.size()), db(bias.size()), din(in.size());
    conv3x3_backward(cols.data(), probe.data(), ci, h, w, weight.data(), co, dw.data(), db.data(),
                     din.data(), scratch.data());
    check_close(dw, numeric_grad(weight, f));
    check_close(db, numeric_grad(bias, f));
    check_close(din, numeric_grad(in, f));
}

TEST_CASE("linear gradients match finite differences") {
    const int ni = 7, no = 4;
    auto in = random_vec(ni, 6);
    auto weight = random_vec(ni * no, 7);
    auto bias = random_vec(no, 8);
    const auto probe = random_vec(no, 9);
    std::vector<double> out(no);
    auto f = [&] {
        linear_forward(in.data(), ni, weight.data(), bias.data(), no, out.data());
        return dot(out, probe);
    };
    std::vector<double> dw(weight.size()), db(bias.size()), din(in.size());
    linear_backward(in.data(), probe.data(), ni, weight.data(), no, dw.data(), db.data(), din.data());
    check_close(dw, numeric_grad(weight, f));
    check_close(db, numeric_grad(bias, f));
    check_close(din, numeric_grad(in, f));
}

TEST_CASE("max pool routes gradients to the winner") {
    const std::vector<double> in{1, 5, 2, 0, 3, 4, -1, 9, -2, -3, 6, 7, -4, -5, 8, 1};
    std::vector<double> out(4), grad_in(16);
    std::vector<std::uint8_t> arg(4);
    maxpool2_forward(in.data(), 1, 4, 4, out.data(), arg.data());
    CHECK(out == std::vector<double>{5, 9, -2, 8});
    const std::vector<double> g{1, 2, 3, 4};
    maxpool2_backward(g.data(), arg.data(), static_cast<const double*>(nullptr), 1, 4, 4,
                      grad_in.data());
    CHECK(grad_in[1] == 1);
    CHECK(grad_in[7] == 2);
    CHECK(grad_in[8] == 3);
    CHECK(grad_in[14] == 4);
    maxpool2_backward(g.data(), arg.data(), out.data(), 1, 4, 4, grad_in.data());
    CHECK(grad_in[8] == 0);
    CHECK(grad_in[1] == 1);
    std::vector<double> odd(15);
    CHECK_THROWS_AS(maxpool2_forward(odd.data(), 1, 3, 5, out.data(), arg.data()), ConfigError);
}

TEST_CASE("adaptive pooling bins and gradients") {
    const auto bins = adaptive_bins(32, 15);
    REQUIRE(bins.size() == 15);
    CHECK(bins[0].begin == 0);
    CHECK(bins[0].end == 3);
    CHECK(bins[14].end == 32);
    const auto rows = adaptive_bins(32, 2);
    CHECK(rows[0].end == 16);
    CHECK(rows[1].begin == 16);
    const auto even = adaptive_bins(8, 4);
    for (int i = 0; i < 4; ++i) CHECK(even[i].end - even[i].begin == 2);

    const int c = 2, h = 6, w = 7, oh = 2, ow = 3;
    auto in = random_vec(c * h * w, 10);
    const auto probe = random_vec(c * oh * ow, 11);
    std::vector<double> out(c * oh * ow);
    auto f = [&] {
        adaptive_avgpool_forward(in.data(), c, h, w, oh, ow, out.data());
        return dot(out, probe);
    };
    std::vector<double> din(in.size(), 0.0);
    adaptive_avgpool_backward(probe.data(), c, h, w, oh, ow, din.data());
    check_close(din, numeric_grad(in, f));
}

TEST_CASE("logistic squash") {
    CHECK(logistic_squash(0.0) == Approx(std::numbers::pi / 2));
    CHECK(logistic_squash(40.0) == Approx(std::numbers::pi));
    CHECK(logistic_squash(-40.0) == Approx(0.0).margin(1e-15));
    CHECK(logistic_squash_grad(0.0) == Approx(std::numbers::pi / 4));
    const double h = 1e-6;
    for (double x : {-2.0, 0.3, 1.7}) {
        CHECK(logistic_squash_grad(x) ==
              Approx((logistic_squash(x + h) - logistic_squash(x - h)) / (2 * h)).epsilon(1e-7));
    }
}

TEST_CASE("weighted softmax cross-entropy") {
    const std::array<double, 3> z{0.0, 0.0, 0.0}, ones{1, 1, 1};
    const auto r = softmax_ce<double>(z, 1, ones);
    CHECK(r.loss == Approx(std::log(3.0)));
    CHECK(r.probs[0] == Approx(1.0 / 3));
    CHECK(r.logit_grad[1] == Approx(1.0 / 3 - 1));

    const std::array<double, 3> big{1000.0, 0.0, -1000.0}, w{2.0, 0.5, 1.0};
    const auto s = softmax_ce<double>(big, 2, w);
    CHECK(std::isfinite(s.loss));
    CHECK(s.loss == Approx(2000.0));
    CHECK(s.probs[0] == Approx(1.0));

    std::array<double, 3> zz{0.4, -1.1, 2.0};
    const auto t = softmax_ce<double>(zz, 0, w);
    for (int c = 0; c < 3; ++c) {
        CHECK(t.logit_grad[c] == Approx(w[0] * (t.probs[c] - (c == 0 ? 1.0 : 0.0))));
        auto a = zz, b = zz;
        a[c] += 1e-6;
        b[c] -= 1e-6;
        const double fd = (softmax_ce<double>(a, 0, w).loss - softmax_ce<double>(b, 0, w).loss) / 2e-6;
        CHECK(t.logit_grad[c] == Approx(fd).margin(1e-8));
    }
    CHECK_THROWS_AS(softmax_ce<double>(zz, 3, w), ConfigError);
}

TEST_CASE("Adam update rule") {
    ParamStore<double> store;
    store.add("w", {3}).value = {1.0, -2.0, 0.5};
    store.add("stat", {1}, false).value = {7.0};
    auto& p = store.get("w");
    auto& frozen = store.get("stat");
    Adam<double> opt;

    store.zero_grad();
    opt.step(store);
    CHECK(p.value == std::vector<double>{1.0, -2.0, 0.5});

    // First step moves each weight by lr against the sign of its gradient.
    Adam<double> fresh;
    p.grad = {0.3, -5.0, 1e-3};
    frozen.grad = {100.0};
    fresh.step(store);
    CHECK(p.value[0] == Approx(1.0 - 1e-3).epsilon(1e-6));
    CHECK(p.value[1] == Approx(-2.0 + 1e-3).epsilon(1e-6));
    CHECK(p.value[2] == Approx(0.5 - 1e-3).epsilon(1e-4));
    CHECK(frozen.value[0] == 7.0);
    CHECK(opt.steps() == 1);
    CHECK(fresh.steps() == 1);
    CHECK(store.count_trainable() == 3);
}

TEST_CASE("kaiming init bounds and determinism") {
    ParamStore<double> a, b;
    auto& pa = a.add("w", {64, 960});
    auto& pb = b.add("w", {64, 960});
    kaiming_uniform(pa, 960, 5);
    kaiming_uniform(pb, 960, 5);
    CHECK(pa.value == pb.value);
    const double bound = std::sqrt(6.0 / 960);
    double lo = 0, hi = 0;
    for (double v : pa.value) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo >= -bound);
    CHECK(hi <= bound);
    CHECK(hi > 0.99 * bound);
    CHECK_THROWS_AS(a.add("w", {1}), ConfigError);
    CHECK_THROWS_AS(a.get("missing"), ConfigError);
}

TEST_CASE("checkpoint round trip") {
    Checkpoint ck;
    ck.header["variant"] = "hqnn";
    ck.header["seed"] = "42";
    ck.params.add("fc.weight", {2, 3}).value = {1.5f, -0.0f, 3e-8f, -7.25f, 1e30f, 0.1f};
    ck.params.add("latent.mean", {2}, false).value = {0.5f, -0.5f};
    const auto& w = ck.params.get("fc.weight");
    const auto path = std::filesystem::temp_directory_path() / "radocc_test.ckpt";
    save_checkpoint(ck, path);
    const auto back = load_checkpoint(path);
    CHECK(back.header == ck.header);
    REQUIRE(back.params.all().size() == 2);
    CHECK(back.params.get("fc.weight").value == w.value);
    CHECK(back.params.get("fc.weight").shape == std::vector<int>{2, 3});
    CHECK_FALSE(back.params.get("latent.mean").trainable);

    {
        std::ofstream os(path, std::ios::binary);
        os << "CKPT1garbage";
    }
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
    std::filesystem::remove(path);
}

TEST_CASE("conv results do not depend on buffer alignment") {
    const int ci = 4, co = 8, h = 16, w = 16, plane = h * w;
    const auto in = random_vec(ci * plane, 12);
    const auto wt = random_vec(co * ci * 9, 13);
    const auto dy = random_vec(co * plane, 14);
    std::vector<std::vector<float>> results;
    for (int off = 0; off < 8; ++off) {
        auto place = [&](const std::vector<double>& src) {
            std::vector<float> buf(src.size() + 8, 0.0f);
            std::copy(src.begin(), src.end(), buf.begin() + off);
            return buf;
        };
        auto bi = place(in), bw = place(wt), bd = place(dy);
        std::vector<float> bias(co, 0.1f), out(dy.size() + 8), cols(ci * 9 * plane + 8),
            scratch(cols.size()), dw(wt.size() + 8), db(co + 8), din(in.size() + 8);
        conv3x3_forward(bi.data() + off, ci, h, w, bw.data() + off, bias.data(), co, out.data() + off,
                        cols.data() + off);
        conv3x3_backward(cols.data() + off, bd.data() + off, ci, h, w, bw.data() + off, co,
                         dw.data() + off, db.data() + off, din.data() + off, scratch.data() + off);
        std::vector<float> r(out.begin() + off, out.begin() + off + co * plane);
        r.insert(r.end(), dw.begin() + off, dw.begin() + off + static_cast<std::ptrdiff_t>(wt.size()));
        r.insert(r.end(), db.begin() + off, db.begin() + off + co);
        r.insert(r.end(), din.begin() + off, din.begin() + off + ci * plane);
        results.push_back(r);
    }
    for (std::size_t k = 1; k < results.size(); ++k) CHECK(results[k] == results[0]);
}
