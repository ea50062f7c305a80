#include "weakkam/dynamics.hpp"
#include "weakkam/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

namespace weakkam {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double phase(const FourierTerm& term, const Vec& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < term.k.size(); ++i) s += term.k[i] * q[static_cast<Eigen::Index>(i)];
    return kTwoPi * s;
}

}  // namespace

double FourierPotential::value(const Vec& q) const {
    double v = 0.0;
    for (const auto& term : terms) {
        const double ph = phase(term, q);
        v += term.a * std::cos(ph) + term.b * std::sin(ph);
    }
    return v;
}

Vec FourierPotential::gradient(const Vec& q) const {
    Vec g = Vec::Zero(dim);
    for (const auto& term : terms) {
        const double ph = phase(term, q);
        const double dph = -term.a * std::sin(ph) + term.b * std::cos(ph);
        for (int i = 0; i < dim; ++i) g[i] += kTwoPi * term.k[static_cast<std::size_t>(i)] * dph;
    }
    return g;
}

Mat FourierPotential::hessian(const Vec& q) const {
    Mat h = Mat::Zero(dim, dim);
    for (const auto& term : terms) {
        const double ph = phase(term, q);
        const double d2ph = -term.a * std::cos(ph) - term.b * std::sin(ph);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                h(i, j) += kTwoPi * kTwoPi * term.k[static_cast<std::size_t>(i)] *
                           term.k[static_cast<std::size_t>(j)] * d2ph;
    }
    return h;
}

HamiltonianModel mechanical_model(FourierPotential potential, std::string tag) {
    for (const auto& term : potential.terms) {
        if (static_cast<int>(term.k.size()) != potential.dim) {
            throw InputError("Fourier term wave vector has wrong dimension");
        }
    }
    const int d = potential.dim;
    auto V = std::make_shared<const FourierPotential>(std::move(potential));

    HamiltonianModel m;
    m.dim = d;
    m.kind_tag = std::move(tag);
    m.eval_H = [V](const Vec& q, const Vec& p) { return 0.5 * p.squaredNorm() + V->value(q); };
    m.eval_grad = [V](const Vec& q, const Vec& p) { return HamiltonianGradient{V->gradient(q), p}; };
    m.eval_hess = [V, d](const Vec& q, const Vec&) {
        return HamiltonianHessian{V->hessian(q), Mat::Zero(d, d), Mat::Identity(d, d)};
    };
    m.eval_L = [V](const Vec& q, const Vec& v) { return 0.5 * v.squaredNorm() - V->value(q); };
    m.eval_Lv = [](const Vec&, const Vec& v) { return v; };
    return m;
}

HamiltonianModel pendulum_model() {
    FourierPotential V;
    V.dim = 1;
    V.terms.push_back({{1}, 1.0, 0.0});
    return mechanical_model(std::move(V), "pendulum");
}

HamiltonianModel free_model(int dim) {
    if (dim < 1 || dim > kMaxDim) throw InputError("free model dimension out of range");
    FourierPotential V;
    V.dim = dim;
    return mechanical_model(std::move(V), "free");
}

HamiltonianModel model_from_spec(const std::string& spec) {
    if (spec == "pendulum") return pendulum_model();
    if (spec == "free") return free_model(1);
    if (spec.rfind("free:", 0) == 0) {
        try {
            return free_model(std::stoi(spec.substr(5)));
        } catch (const std::logic_error&) {
            throw ConfigError("model", "bad dimension in '" + spec + "'");
        }
    }
    if (spec.rfind("mechanical:", 0) == 0) {
        FourierPotential V;
        V.dim = 0;
        std::stringstream terms(spec.substr(11));
        std::string item;
        while (std::getline(terms, item, ',')) {
            const auto eq = item.find('=');
            const auto colon = item.find(':', eq == std::string::npos ? 0 : eq);
            if (eq == std::string::npos || colon == std::string::npos) {
                throw ConfigError("model", "expected k=a:b in '" + item + "'");
            }
            FourierTerm term;
            std::stringstream ks(item.substr(0, eq));
            std::string comp;
            try {
                while (std::getline(ks, comp, 'x')) term.k.push_back(std::stoi(comp));
                term.a = std::stod(item.substr(eq + 1, colon - eq - 1));
                term.b = std::stod(item.substr(colon + 1));
            } catch (const std::logic_error&) {
                throw ConfigError("model", "unparsable term '" + item + "'");
            }
            if (V.dim == 0) V.dim = static_cast<int>(term.k.size());
            if (static_cast<int>(term.k.size()) != V.dim || V.dim > kMaxDim) {
                throw ConfigError("model", "inconsistent wave-vector dimension in '" + item + "'");
            }
            V.terms.push_back(std::move(term));
        }
        if (V.dim == 0) throw ConfigError("model", "no Fourier terms in '" + spec + "'");
        return mechanical_model(std::move(V));
    }
    throw ConfigError("model", "unknown model '" + spec + "'");
}

HamiltonianModel reversed(const HamiltonianModel& model) {
    HamiltonianModel r;
    r.dim = model.dim;
    r.kind_tag = model.kind_tag + "~";
    auto H = model.eval_H;
    auto grad = model.eval_grad;
    auto hess = model.eval_hess;
    auto L = model.eval_L;
    auto Lv = model.eval_Lv;
    r.eval_H = [H](const Vec& q, const Vec& p) { return H(q, -p); };
    r.eval_grad = [grad](const Vec& q, const Vec& p) {
        auto g = grad(q, -p);
        return HamiltonianGradient{g.dq, -g.dp};
    };
    r.eval_hess = [hess](const Vec& q, const Vec& p) {
        auto h = hess(q, -p);
        return HamiltonianHessian{h.qq, -h.qp, h.pp};
    };
    r.eval_L = [L](const Vec& q, const Vec& v) { return L(q, -v); };
    r.eval_Lv = [Lv](const Vec& q, const Vec& v) { return Vec(-Lv(q, -v)); };
    return r;
}

ModelCheck validate_model(const HamiltonianModel& model, int samples, unsigned seed, double p_range) {
    ModelCheck out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uq(0.0, 1.0), up(-p_range, p_range);
    const int d = model.dim;
    for (int s = 0; s < samples; ++s) {
        Vec q(d), p(d);
        for (int i = 0; i < d; ++i) {
            q[i] = uq(rng);
            p[i] = up(rng);
        }
        const auto h = model.eval_hess(q, p);
        Eigen::LLT<Mat> llt(h.pp);
        if (llt.info() != Eigen::Success) out.convex = false;
        out.symmetry_error = std::max({out.symmetry_error, (h.qq - h.qq.transpose()).cwiseAbs().maxCoeff(),
                                       (h.pp - h.pp.transpose()).cwiseAbs().maxCoeff()});
        const Vec v = model.eval_grad(q, p).dp;
        out.legendre_error = std::max(out.legendre_error, (model.eval_Lv(q, v) - p).cwiseAbs().maxCoeff());
        ++out.samples;
    }
    return out;
}

}  // namespace weakkam
