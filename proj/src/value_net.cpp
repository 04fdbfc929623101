#include "gsp/value_net.hpp"

#include "gsp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace gsp::net {

double smoothmax(std::span<const double> values, double alpha) {
    if (values.empty()) throw EmptyInput("smoothmax of empty input");
    double peak = *std::max_element(values.begin(), values.end());
    double num = 0.0, den = 0.0;
    for (double v : values) {
        double e = std::exp(alpha * (v - peak));
        num += v * e;
        den += e;
    }
    return num / den;
}

namespace {

using Vec = std::vector<double>;

double silu(double z) {
    double s = 1.0 / (1.0 + std::exp(-z));
    return z * s;
}

double silu_grad(double z) {
    double s = 1.0 / (1.0 + std::exp(-z));
    return s * (1.0 + z * (1.0 - s));
}

// y = l2.w * silu(l1.w * x + l1.b) + l2.b; z1/h are the stored internals
void perc_forward(const Perceptron& p, const double* x, double* z1, double* h, double* y) {
    const Affine& a1 = p.l1;
    for (std::uint32_t i = 0; i < a1.out; ++i) {
        double z = a1.b[i];
        const double* row = &a1.w[static_cast<std::size_t>(i) * a1.in];
        for (std::uint32_t j = 0; j < a1.in; ++j) z += row[j] * x[j];
        z1[i] = z;
        h[i] = silu(z);
    }
    const Affine& a2 = p.l2;
    for (std::uint32_t i = 0; i < a2.out; ++i) {
        double acc = a2.b[i];
        const double* row = &a2.w[static_cast<std::size_t>(i) * a2.in];
        for (std::uint32_t j = 0; j < a2.in; ++j) acc += row[j] * h[j];
        y[i] = acc;
    }
}

// accumulates parameter grads into gp and input grads into dx (when non-null)
void perc_backward(const Perceptron& p, Perceptron& gp, const double* x, const double* z1,
                   const double* h, const double* dy, double* dx, double* dh_buf,
                   double* dz_buf) {
    const Affine& a2 = p.l2;
    for (std::uint32_t j = 0; j < a2.in; ++j) dh_buf[j] = 0.0;
    for (std::uint32_t i = 0; i < a2.out; ++i) {
        double g = dy[i];
        if (g == 0.0) continue;
        gp.l2.b[i] += g;
        double* grow = &gp.l2.w[static_cast<std::size_t>(i) * a2.in];
        const double* row = &a2.w[static_cast<std::size_t>(i) * a2.in];
        for (std::uint32_t j = 0; j < a2.in; ++j) {
            grow[j] += g * h[j];
            dh_buf[j] += g * row[j];
        }
    }
    const Affine& a1 = p.l1;
    for (std::uint32_t i = 0; i < a1.out; ++i) dz_buf[i] = dh_buf[i] * silu_grad(z1[i]);
    for (std::uint32_t i = 0; i < a1.out; ++i) {
        double g = dz_buf[i];
        if (g == 0.0) continue;
        gp.l1.b[i] += g;
        double* grow = &gp.l1.w[static_cast<std::size_t>(i) * a1.in];
        const double* row = &a1.w[static_cast<std::size_t>(i) * a1.in];
        for (std::uint32_t j = 0; j < a1.in; ++j) {
            grow[j] += g * x[j];
            if (dx) dx[j] += g * row[j];
        }
    }
}

std::uint32_t hidden_width(int configured, std::uint32_t out) {
    return configured > 0 ? static_cast<std::uint32_t>(configured) : out;
}

Affine make_affine(std::uint32_t out, std::uint32_t in, Rng& rng) {
    Affine a;
    a.out = out;
    a.in = in;
    a.w.resize(static_cast<std::size_t>(out) * in);
    a.b.assign(out, 0.0);
    if (in > 0) {
        double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (auto& w : a.w) w = rng.real(-bound, bound);
    }
    return a;
}

Affine zero_like(const Affine& a) {
    Affine z;
    z.out = a.out;
    z.in = a.in;
    z.w.assign(a.w.size(), 0.0);
    z.b.assign(a.b.size(), 0.0);
    return z;
}

Perceptron zero_like(const Perceptron& p) {
    return {zero_like(p.l1), zero_like(p.l2)};
}

ParamSet zeros_like(const ParamSet& p) {
    ParamSet z;
    z.combiners.reserve(p.combiners.size());
    for (const auto& c : p.combiners) z.combiners.push_back(zero_like(c));
    z.update = zero_like(p.update);
    z.readout = zero_like(p.readout);
    return z;
}

struct AffineRef {
    Affine* a;
    bool readout;
};

std::vector<AffineRef> collect(ParamSet& p) {
    std::vector<AffineRef> out;
    out.reserve(p.combiners.size() * 2 + 4);
    for (auto& c : p.combiners) {
        out.push_back({&c.l1, false});
        out.push_back({&c.l2, false});
    }
    out.push_back({&p.update.l1, false});
    out.push_back({&p.update.l2, false});
    out.push_back({&p.readout.l1, true});
    out.push_back({&p.readout.l2, true});
    return out;
}

bool same_shape(const ParamSet& a, const ParamSet& b) {
    auto& ca = const_cast<ParamSet&>(a);
    auto& cb = const_cast<ParamSet&>(b);
    auto ra = collect(ca), rb = collect(cb);
    if (ra.size() != rb.size()) return false;
    for (std::size_t i = 0; i < ra.size(); ++i)
        if (ra[i].a->out != rb[i].a->out || ra[i].a->in != rb[i].a->in) return false;
    return true;
}

// forward intermediates for one graph evaluation
struct Tape {
    std::uint32_t n = 0;
    int d = 0, L = 0;
    std::vector<Vec> X;                                   // L+1 of n*d
    std::vector<std::vector<Vec>> atom_z1, atom_h, atom_out;   // [layer][atom]
    std::vector<Vec> node_m, node_z1, node_h;             // [layer]
    Vec pooled;                                           // d
    std::vector<Vec> ro_z1, ro_h;                         // per action node
    Vec q;                                                // per action node
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> incidence;
};

void check_graph(const QNetwork& net, const graph::RelationalGraph& g) {
    for (const auto& atom : g.atoms) {
        if (atom.rel >= net.params.combiners.size())
            throw MissingRelation("graph uses relation id " + std::to_string(atom.rel) +
                                  " with no combiner");
        if (atom.rel >= net.signature.size() ||
            net.signature.relations[atom.rel].arity != atom.args.size())
            throw MissingRelation("relation arity mismatch for id " + std::to_string(atom.rel));
    }
}

// smoothmax over v with output f already known; adds dout * d f/d v_j to dv
void smoothmax_backward(std::span<const double> v, double f, double alpha, double dout,
                        std::span<double*> dv) {
    double peak = *std::max_element(v.begin(), v.end());
    double den = 0.0;
    for (double x : v) den += std::exp(alpha * (x - peak));
    for (std::size_t j = 0; j < v.size(); ++j) {
        double p = std::exp(alpha * (v[j] - peak)) / den;
        *dv[j] += dout * p * (1.0 + alpha * (v[j] - f));
    }
}

void run_forward(const QNetwork& net, const graph::RelationalGraph& g, Tape& t) {
    check_graph(net, g);
    const int d = net.cfg.dim;
    const int L = net.cfg.layers;
    const std::uint32_t n = g.num_nodes();
    t.n = n;
    t.d = d;
    t.L = L;

    t.incidence.assign(n, {});
    for (std::uint32_t ai = 0; ai < g.atoms.size(); ++ai)
        for (std::uint32_t pos = 0; pos < g.atoms[ai].args.size(); ++pos)
            t.incidence[g.atoms[ai].args[pos]].push_back({ai, pos});

    t.X.assign(static_cast<std::size_t>(L) + 1, Vec(static_cast<std::size_t>(n) * d, 0.0));
    t.atom_z1.assign(L, {});
    t.atom_h.assign(L, {});
    t.atom_out.assign(L, {});
    t.node_m.assign(L, Vec(static_cast<std::size_t>(n) * d, 0.0));
    const std::uint32_t hu = net.params.update.l1.out;
    t.node_z1.assign(L, Vec(static_cast<std::size_t>(n) * hu, 0.0));
    t.node_h.assign(L, Vec(static_cast<std::size_t>(n) * hu, 0.0));

    Vec xbuf, vals;
    for (int layer = 0; layer < L; ++layer) {
        const Vec& X = t.X[layer];
        Vec& Xn = t.X[layer + 1];
        auto& az1 = t.atom_z1[layer];
        auto& ah = t.atom_h[layer];
        auto& aout = t.atom_out[layer];
        az1.resize(g.atoms.size());
        ah.resize(g.atoms.size());
        aout.resize(g.atoms.size());

        for (std::size_t ai = 0; ai < g.atoms.size(); ++ai) {
            const auto& atom = g.atoms[ai];
            const std::size_t ar = atom.args.size();
            if (ar == 0) continue;
            const Perceptron& comb = net.params.combiners[atom.rel];
            xbuf.resize(ar * d);
            for (std::size_t p = 0; p < ar; ++p)
                std::memcpy(&xbuf[p * d], &X[static_cast<std::size_t>(atom.args[p]) * d],
                            sizeof(double) * d);
            az1[ai].resize(comb.l1.out);
            ah[ai].resize(comb.l1.out);
            aout[ai].resize(ar * d);
            perc_forward(comb, xbuf.data(), az1[ai].data(), ah[ai].data(), aout[ai].data());
        }

        Vec ubuf(2 * d);
        Vec du(d);
        for (std::uint32_t o = 0; o < n; ++o) {
            double* m = &t.node_m[layer][static_cast<std::size_t>(o) * d];
            const auto& inc = t.incidence[o];
            if (!inc.empty()) {
                for (int c = 0; c < d; ++c) {
                    vals.clear();
                    for (const auto& [ai, pos] : inc)
                        vals.push_back(aout[ai][pos * static_cast<std::size_t>(d) + c]);
                    m[c] = smoothmax(vals, net.cfg.alpha);
                }
            }
            // empty aggregation is the zero message
            std::memcpy(ubuf.data(), &X[static_cast<std::size_t>(o) * d], sizeof(double) * d);
            std::memcpy(ubuf.data() + d, m, sizeof(double) * d);
            perc_forward(net.params.update, ubuf.data(),
                         &t.node_z1[layer][static_cast<std::size_t>(o) * hu],
                         &t.node_h[layer][static_cast<std::size_t>(o) * hu], du.data());
            for (int c = 0; c < d; ++c)
                Xn[static_cast<std::size_t>(o) * d + c] =
                    X[static_cast<std::size_t>(o) * d + c] + du[c];
        }
    }

    const std::size_t num_actions = g.action_nodes.size();
    t.q.assign(num_actions, 0.0);
    t.ro_z1.assign(num_actions, {});
    t.ro_h.assign(num_actions, {});
    if (num_actions == 0) return;

    t.pooled.assign(d, 0.0);
    const Vec& XL = t.X[L];
    for (int c = 0; c < d; ++c) {
        vals.clear();
        for (std::uint32_t o = 0; o < n; ++o)
            vals.push_back(XL[static_cast<std::size_t>(o) * d + c]);
        t.pooled[c] = smoothmax(vals, net.cfg.alpha);
    }

    Vec rbuf(2 * d);
    const std::uint32_t hr = net.params.readout.l1.out;
    for (std::size_t k = 0; k < num_actions; ++k) {
        const std::uint32_t node = g.action_node(k);
        std::memcpy(rbuf.data(), &XL[static_cast<std::size_t>(node) * d], sizeof(double) * d);
        std::memcpy(rbuf.data() + d, t.pooled.data(), sizeof(double) * d);
        t.ro_z1[k].resize(hr);
        t.ro_h[k].resize(hr);
        perc_forward(net.params.readout, rbuf.data(), t.ro_z1[k].data(), t.ro_h[k].data(),
                     &t.q[k]);
    }
}

// seeds dq per action node; accumulates into grads
void run_backward(const QNetwork& net, const graph::RelationalGraph& g, const Tape& t,
                  std::span<const double> dq, ParamSet& grads) {
    const int d = t.d;
    const int L = t.L;
    const std::uint32_t n = t.n;
    if (n == 0) return;

    Vec dX(static_cast<std::size_t>(n) * d, 0.0);
    Vec dpool(d, 0.0);
    Vec dh_buf, dz_buf;
    const std::uint32_t hr = net.params.readout.l1.out;
    dh_buf.resize(std::max<std::size_t>(hr, 1));
    dz_buf.resize(std::max<std::size_t>(hr, 1));

    Vec rbuf(2 * d), drbuf(2 * d);
    const Vec& XL = t.X[L];
    for (std::size_t k = 0; k < dq.size(); ++k) {
        if (dq[k] == 0.0) continue;
        const std::uint32_t node = g.action_node(k);
        std::memcpy(rbuf.data(), &XL[static_cast<std::size_t>(node) * d], sizeof(double) * d);
        std::memcpy(rbuf.data() + d, t.pooled.data(), sizeof(double) * d);
        std::fill(drbuf.begin(), drbuf.end(), 0.0);
        double dy = dq[k];
        perc_backward(net.params.readout, grads.readout, rbuf.data(), t.ro_z1[k].data(),
                      t.ro_h[k].data(), &dy, drbuf.data(), dh_buf.data(), dz_buf.data());
        for (int c = 0; c < d; ++c) {
            dX[static_cast<std::size_t>(node) * d + c] += drbuf[c];
            dpool[c] += drbuf[d + c];
        }
    }

    // pool backward
    {
        Vec vals(n);
        std::vector<double*> slots(n);
        for (int c = 0; c < d; ++c) {
            if (dpool[c] == 0.0) continue;
            for (std::uint32_t o = 0; o < n; ++o) {
                vals[o] = XL[static_cast<std::size_t>(o) * d + c];
                slots[o] = &dX[static_cast<std::size_t>(o) * d + c];
            }
            smoothmax_backward(vals, t.pooled[c], net.cfg.alpha, dpool[c],
                               std::span<double*>(slots));
        }
    }

    const std::uint32_t hu = net.params.update.l1.out;
    Vec ubuf(2 * d), dubuf(2 * d);
    Vec dhu(hu), dzu(hu);
    Vec dXprev, dm, xbuf, vals;
    std::vector<Vec> datom(g.atoms.size());

    for (int layer = L - 1; layer >= 0; --layer) {
        const Vec& X = t.X[layer];
        dXprev.assign(static_cast<std::size_t>(n) * d, 0.0);
        dm.assign(static_cast<std::size_t>(n) * d, 0.0);

        for (std::uint32_t o = 0; o < n; ++o) {
            const double* seed = &dX[static_cast<std::size_t>(o) * d];
            bool live = false;
            for (int c = 0; c < d; ++c)
                if (seed[c] != 0.0) { live = true; break; }
            // residual path
            for (int c = 0; c < d; ++c)
                dXprev[static_cast<std::size_t>(o) * d + c] += seed[c];
            if (!live) continue;
            std::memcpy(ubuf.data(), &X[static_cast<std::size_t>(o) * d], sizeof(double) * d);
            std::memcpy(ubuf.data() + d, &t.node_m[layer][static_cast<std::size_t>(o) * d],
                        sizeof(double) * d);
            std::fill(dubuf.begin(), dubuf.end(), 0.0);
            perc_backward(net.params.update, grads.update, ubuf.data(),
                          &t.node_z1[layer][static_cast<std::size_t>(o) * hu],
                          &t.node_h[layer][static_cast<std::size_t>(o) * hu], seed,
                          dubuf.data(), dhu.data(), dzu.data());
            for (int c = 0; c < d; ++c) {
                dXprev[static_cast<std::size_t>(o) * d + c] += dubuf[c];
                dm[static_cast<std::size_t>(o) * d + c] = dubuf[d + c];
            }
        }

        // message aggregation backward
        const auto& aout = t.atom_out[layer];
        for (std::size_t ai = 0; ai < g.atoms.size(); ++ai)
            datom[ai].assign(aout[ai].size(), 0.0);
        std::vector<double*> slots;
        for (std::uint32_t o = 0; o < n; ++o) {
            const auto& inc = t.incidence[o];
            if (inc.empty()) continue;
            for (int c = 0; c < d; ++c) {
                double dout = dm[static_cast<std::size_t>(o) * d + c];
                if (dout == 0.0) continue;
                vals.clear();
                slots.clear();
                for (const auto& [ai, pos] : inc) {
                    vals.push_back(aout[ai][pos * static_cast<std::size_t>(d) + c]);
                    slots.push_back(&datom[ai][pos * static_cast<std::size_t>(d) + c]);
                }
                smoothmax_backward(vals, t.node_m[layer][static_cast<std::size_t>(o) * d + c],
                                   net.cfg.alpha, dout, std::span<double*>(slots));
            }
        }

        // combiner backward
        Vec dxbuf;
        for (std::size_t ai = 0; ai < g.atoms.size(); ++ai) {
            const auto& atom = g.atoms[ai];
            const std::size_t ar = atom.args.size();
            if (ar == 0) continue;
            bool live = false;
            for (double v : datom[ai])
                if (v != 0.0) { live = true; break; }
            if (!live) continue;
            const Perceptron& comb = net.params.combiners[atom.rel];
            xbuf.resize(ar * d);
            for (std::size_t p = 0; p < ar; ++p)
                std::memcpy(&xbuf[p * d], &X[static_cast<std::size_t>(atom.args[p]) * d],
                            sizeof(double) * d);
            dxbuf.assign(ar * d, 0.0);
            const std::uint32_t hc = comb.l1.out;
            if (dh_buf.size() < hc) { dh_buf.resize(hc); dz_buf.resize(hc); }
            perc_backward(comb, grads.combiners[atom.rel], xbuf.data(),
                          t.atom_z1[layer][ai].data(), t.atom_h[layer][ai].data(),
                          datom[ai].data(), dxbuf.data(), dh_buf.data(), dz_buf.data());
            for (std::size_t p = 0; p < ar; ++p)
                for (int c = 0; c < d; ++c)
                    dXprev[static_cast<std::size_t>(atom.args[p]) * d + c] +=
                        dxbuf[p * static_cast<std::size_t>(d) + c];
        }

        dX.swap(dXprev);
    }
}

} // namespace

QNetwork init(const graph::RelationSignature& sig, const NetConfig& cfg, std::uint64_t seed) {
    QNetwork net;
    net.cfg = cfg;
    net.signature = sig;
    Rng rng(seed);
    const std::uint32_t d = static_cast<std::uint32_t>(cfg.dim);
    for (const auto& rel : sig.relations) {
        const std::uint32_t width = rel.arity * d;
        const std::uint32_t hidden = rel.arity == 0
            ? 0
            : hidden_width(cfg.hidden_combiner, width);
        Perceptron p;
        p.l1 = make_affine(hidden, width, rng);
        p.l2 = make_affine(width, hidden, rng);
        net.params.combiners.push_back(std::move(p));
    }
    const std::uint32_t hu = hidden_width(cfg.hidden_update, d);
    net.params.update.l1 = make_affine(hu, 2 * d, rng);
    net.params.update.l2 = make_affine(d, hu, rng);
    const std::uint32_t hr = hidden_width(cfg.hidden_readout, 1);
    net.params.readout.l1 = make_affine(hr, 2 * d, rng);
    net.params.readout.l2 = make_affine(1, hr, rng);
    return net;
}

std::vector<double> forward(const QNetwork& net, const graph::RelationalGraph& g) {
    Tape t;
    run_forward(net, g, t);
    return t.q;
}

std::pair<double, Gradients> loss_and_grad(const QNetwork& net,
                                           std::span<const BatchItem> batch) {
    if (batch.empty()) throw EmptyInput("loss_and_grad on empty batch");
    Gradients grads;
    grads.params = zeros_like(net.params);
    grads.count = batch.size();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    Tape t;
    for (const auto& item : batch) {
        if (!std::isfinite(item.target))
            throw NonFiniteTarget("non-finite regression target");
        run_forward(net, *item.graph, t);
        auto it = std::find(item.graph->action_nodes.begin(), item.graph->action_nodes.end(),
                            item.action);
        if (it == item.graph->action_nodes.end())
            throw std::invalid_argument("batch action is not an action node of its graph");
        std::size_t k = static_cast<std::size_t>(it - item.graph->action_nodes.begin());
        double err = t.q[k] - item.target;
        loss += err * err;
        Vec dq(t.q.size(), 0.0);
        dq[k] = 2.0 * err * inv_n;
        run_backward(net, *item.graph, t, dq, grads.params);
    }
    loss *= inv_n;
    grads.loss = loss;
    return {loss, std::move(grads)};
}

void apply_update(QNetwork& net, const Gradients& grads, double lr_gnn, double lr_readout,
                  Optimizer& opt) {
    if (!same_shape(net.params, grads.params))
        throw ShapeMismatch("gradient shape does not match network");
    auto refs = collect(net.params);
    auto grefs = collect(const_cast<ParamSet&>(grads.params));
    if (opt.mode == OptMode::sgd) {
        for (std::size_t i = 0; i < refs.size(); ++i) {
            const double lr = refs[i].readout ? lr_readout : lr_gnn;
            Affine& w = *refs[i].a;
            const Affine& g = *grefs[i].a;
            for (std::size_t j = 0; j < w.w.size(); ++j) w.w[j] -= lr * g.w[j];
            for (std::size_t j = 0; j < w.b.size(); ++j) w.b[j] -= lr * g.b[j];
        }
    } else {
        if (!opt.initialized) {
            opt.m = zeros_like(net.params);
            opt.v = zeros_like(net.params);
            opt.initialized = true;
        } else if (!same_shape(opt.m, net.params)) {
            throw ShapeMismatch("optimizer state does not match network");
        }
        ++opt.step;
        const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
        const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
        auto mrefs = collect(opt.m);
        auto vrefs = collect(opt.v);
        auto adam = [&](double& w, double g, double& m, double& v, double lr) {
            m = opt.beta1 * m + (1.0 - opt.beta1) * g;
            v = opt.beta2 * v + (1.0 - opt.beta2) * g * g;
            w -= lr * (m / c1) / (std::sqrt(v / c2) + opt.eps);
        };
        for (std::size_t i = 0; i < refs.size(); ++i) {
            const double lr = refs[i].readout ? lr_readout : lr_gnn;
            Affine& w = *refs[i].a;
            const Affine& g = *grefs[i].a;
            Affine& m = *mrefs[i].a;
            Affine& v = *vrefs[i].a;
            for (std::size_t j = 0; j < w.w.size(); ++j) adam(w.w[j], g.w[j], m.w[j], v.w[j], lr);
            for (std::size_t j = 0; j < w.b.size(); ++j) adam(w.b[j], g.b[j], m.b[j], v.b[j], lr);
        }
    }
    ++net.version;
}

QNetwork clone_frozen(const QNetwork& net) {
    return net;
}

namespace {

constexpr char kMagic[8] = {'G', 'S', 'P', 'Q', 'N', 'E', 'T', '1'};

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    auto len = get<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    return s;
}

void put_affine(std::ostream& out, const Affine& a) {
    put<std::uint32_t>(out, a.out);
    put<std::uint32_t>(out, a.in);
    out.write(reinterpret_cast<const char*>(a.w.data()),
              static_cast<std::streamsize>(a.w.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(a.b.data()),
              static_cast<std::streamsize>(a.b.size() * sizeof(double)));
}

Affine get_affine(std::istream& in) {
    Affine a;
    a.out = get<std::uint32_t>(in);
    a.in = get<std::uint32_t>(in);
    a.w.resize(static_cast<std::size_t>(a.out) * a.in);
    a.b.resize(a.out);
    in.read(reinterpret_cast<char*>(a.w.data()),
            static_cast<std::streamsize>(a.w.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(a.b.data()),
            static_cast<std::streamsize>(a.b.size() * sizeof(double)));
    return a;
}

} // namespace

void save_checkpoint(const QNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path);
    out.write(kMagic, sizeof(kMagic));
    put<std::int32_t>(out, net.cfg.dim);
    put<std::int32_t>(out, net.cfg.layers);
    put<double>(out, net.cfg.alpha);
    put<std::int32_t>(out, net.cfg.hidden_combiner);
    put<std::int32_t>(out, net.cfg.hidden_update);
    put<std::int32_t>(out, net.cfg.hidden_readout);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(net.cfg.goal_mode));
    put<std::uint32_t>(out, net.signature.num_predicates);
    put<std::uint32_t>(out, net.signature.num_schemas);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(net.signature.relations.size()));
    for (const auto& rel : net.signature.relations) {
        put_string(out, rel.name);
        put<std::uint32_t>(out, rel.arity);
        put<std::uint8_t>(out, static_cast<std::uint8_t>(rel.kind));
    }
    put<std::uint64_t>(out, net.version);
    for (const auto& c : net.params.combiners) {
        put_affine(out, c.l1);
        put_affine(out, c.l2);
    }
    put_affine(out, net.params.update.l1);
    put_affine(out, net.params.update.l2);
    put_affine(out, net.params.readout.l1);
    put_affine(out, net.params.readout.l2);
    if (!out) throw std::runtime_error("short write on checkpoint " + path);
}

QNetwork load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    QNetwork net;
    net.cfg.dim = get<std::int32_t>(in);
    net.cfg.layers = get<std::int32_t>(in);
    net.cfg.alpha = get<double>(in);
    net.cfg.hidden_combiner = get<std::int32_t>(in);
    net.cfg.hidden_update = get<std::int32_t>(in);
    net.cfg.hidden_readout = get<std::int32_t>(in);
    net.cfg.goal_mode = static_cast<graph::GoalMode>(get<std::uint8_t>(in));
    net.signature.num_predicates = get<std::uint32_t>(in);
    net.signature.num_schemas = get<std::uint32_t>(in);
    auto nrel = get<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < nrel; ++i) {
        graph::Relation rel;
        rel.name = get_string(in);
        rel.arity = get<std::uint32_t>(in);
        rel.kind = static_cast<graph::RelationKind>(get<std::uint8_t>(in));
        net.signature.relations.push_back(std::move(rel));
    }
    net.version = get<std::uint64_t>(in);
    for (std::uint32_t i = 0; i < nrel; ++i) {
        Perceptron p;
        p.l1 = get_affine(in);
        p.l2 = get_affine(in);
        net.params.combiners.push_back(std::move(p));
    }
    net.params.update.l1 = get_affine(in);
    net.params.update.l2 = get_affine(in);
    net.params.readout.l1 = get_affine(in);
    net.params.readout.l2 = get_affine(in);
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return net;
}

} // namespace gsp::net
