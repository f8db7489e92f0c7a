#include "rwre/environment.hpp"

#include <cmath>
#include <cstddef>

#include "rwre/errors.hpp"
#include "rwre/json_io.hpp"
#include "rwre/rng.hpp"

namespace rwre {

namespace {

void check_kernel_shape(const TransitionKernel& k, int dimension, const char* what) {
    if (static_cast<int>(k.probs.size()) != 2 * dimension) {
        throw ConfigError(std::string(what) + ": kernel length " + std::to_string(k.probs.size()) +
                          " does not match dimension " + std::to_string(dimension));
    }
}

}  // namespace

void EnvironmentModel::validate() const {
    if (dimension < 1) {
        throw ConfigError("dimension must be >= 1, got " + std::to_string(dimension));
    }
    const double kappa_max = 1.0 / (2.0 * dimension);
    if (!(kappa > 0.0) || kappa > kappa_max) {
        throw ConfigError("kappa must lie in (0, 1/(2d)] = (0, " + std::to_string(kappa_max) +
                          "], got " + std::to_string(kappa));
    }
    if (const auto* pm = std::get_if<PointMass>(&variant)) {
        check_kernel_shape(pm->base, dimension, "point_mass");
        validate_kernel(pm->base, kappa);
    } else if (const auto* ep = std::get_if<EllipticPerturbation>(&variant)) {
        check_kernel_shape(ep->base, dimension, "elliptic_perturbation");
        validate_kernel(ep->base, kappa);
        if (!(ep->spread >= 0.0 && ep->spread <= 1.0)) {
            throw ConfigError("spread must lie in [0, 1], got " + std::to_string(ep->spread));
        }
    } else if (const auto* mix = std::get_if<TwoKernelMixture>(&variant)) {
        check_kernel_shape(mix->k1, dimension, "two_kernel_mixture");
        check_kernel_shape(mix->k2, dimension, "two_kernel_mixture");
        validate_kernel(mix->k1, kappa);
        validate_kernel(mix->k2, kappa);
        if (!(mix->weight >= 0.0 && mix->weight <= 1.0)) {
            throw ConfigError("mixture weight must lie in [0, 1], got " + std::to_string(mix->weight));
        }
    }
}

EnvironmentModel EnvironmentModel::point_mass(int dimension, double kappa, std::vector<double> base) {
    EnvironmentModel m{dimension, kappa, PointMass{TransitionKernel{std::move(base)}}};
    m.validate();
    return m;
}

EnvironmentModel EnvironmentModel::elliptic_perturbation(int dimension, double kappa,
                                                         std::vector<double> base, double spread) {
    EnvironmentModel m{dimension, kappa,
                       EllipticPerturbation{TransitionKernel{std::move(base)}, spread}};
    m.validate();
    return m;
}

EnvironmentModel EnvironmentModel::two_kernel_mixture(int dimension, double kappa, double weight,
                                                      std::vector<double> k1, std::vector<double> k2) {
    EnvironmentModel m{dimension, kappa,
                       TwoKernelMixture{weight, TransitionKernel{std::move(k1)},
                                        TransitionKernel{std::move(k2)}}};
    m.validate();
    return m;
}

EnvironmentView::EnvironmentView(EnvironmentModel model, std::uint64_t env_seed)
    : model_(std::move(model)), env_seed_(env_seed) {
    model_.validate();
    if (const auto* ep = std::get_if<EllipticPerturbation>(&model_.variant)) {
        // Map the base kernel onto the simplex: beta_i = (b_i - kappa)/free,
        // renormalized so the emitted kernels sum to 1 up to rounding even
        // when free = 1 - 2d*kappa is tiny.
        const std::size_t n = ep->base.probs.size();
        const double free = 1.0 - 2.0 * model_.dimension * model_.kappa;
        base_simplex_.assign(n, 0.0);
        if (free > 0.0) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                base_simplex_[i] = std::max(0.0, ep->base.probs[i] - model_.kappa);
                sum += base_simplex_[i];
            }
            if (sum > 0.0) {
                for (double& b : base_simplex_) b /= sum;
            } else {
                for (double& b : base_simplex_) b = 1.0 / static_cast<double>(n);
            }
        }
    }
}

bool EnvironmentView::homogeneous() const {
    return std::holds_alternative<PointMass>(model_.variant);
}

TransitionKernel EnvironmentView::kernel_at(std::span<const std::int64_t> site) const {
    TransitionKernel k;
    k.probs.resize(static_cast<std::size_t>(2 * model_.dimension));
    kernel_at(site, k.probs);
    return k;
}

void EnvironmentView::kernel_at(std::span<const std::int64_t> site, std::span<double> out) const {
    const std::size_t n = static_cast<std::size_t>(2 * model_.dimension);
    if (const auto* pm = std::get_if<PointMass>(&model_.variant)) {
        for (std::size_t i = 0; i < n; ++i) out[i] = pm->base.probs[i];
        return;
    }
    const std::uint64_t key = site_key(env_seed_, site);
    if (const auto* ep = std::get_if<EllipticPerturbation>(&model_.variant)) {
        const double kappa = model_.kappa;
        const double free = 1.0 - 2.0 * model_.dimension * kappa;
        if (free <= 0.0) {
            for (std::size_t i = 0; i < n; ++i) out[i] = kappa;  // forced uniform
            return;
        }
        // w ~ uniform on the simplex via normalized exponentials
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = stream_unit(key, i);
            out[i] = -std::log1p(-u);  // Exp(1), finite since u < 1
            sum += out[i];
        }
        const double s = ep->spread;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = out[i] / sum;
            out[i] = kappa + free * ((1.0 - s) * base_simplex_[i] + s * w);
        }
        return;
    }
    const auto& mix = std::get<TwoKernelMixture>(model_.variant);
    const TransitionKernel& pick = stream_unit(key, 0) < mix.weight ? mix.k1 : mix.k2;
    for (std::size_t i = 0; i < n; ++i) out[i] = pick.probs[i];
}

EnvironmentModel parse_model_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model JSON: ") + e.what());
    }
    return model_from_json(j);
}

std::string model_to_json_string(const EnvironmentModel& model) {
    return model_to_json(model).dump(2);
}

namespace {

std::vector<double> kernel_array(const nlohmann::json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_array()) {
        throw ConfigError(std::string("model JSON: missing kernel array \"") + field + "\"");
    }
    return j[field].get<std::vector<double>>();
}

}  // namespace

EnvironmentModel model_from_json(const nlohmann::json& j) {
    try {
        EnvironmentModel m;
        m.dimension = j.at("dimension").get<int>();
        m.kappa = j.at("kappa").get<double>();
        const auto& var = j.at("variant");
        const std::string type = var.at("type").get<std::string>();
        if (type == "point_mass") {
            m.variant = PointMass{TransitionKernel{kernel_array(var, "base")}};
        } else if (type == "elliptic_perturbation") {
            m.variant = EllipticPerturbation{TransitionKernel{kernel_array(var, "base")},
                                             var.at("spread").get<double>()};
        } else if (type == "two_kernel_mixture") {
            m.variant = TwoKernelMixture{var.at("weight").get<double>(),
                                         TransitionKernel{kernel_array(var, "k1")},
                                         TransitionKernel{kernel_array(var, "k2")}};
        } else {
            throw ConfigError("model JSON: unknown variant type \"" + type + "\"");
        }
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model JSON: ") + e.what());
    }
}

nlohmann::json model_to_json(const EnvironmentModel& model) {
    nlohmann::json j;
    j["dimension"] = model.dimension;
    j["kappa"] = model.kappa;
    nlohmann::json var;
    if (const auto* pm = std::get_if<PointMass>(&model.variant)) {
        var["type"] = "point_mass";
        var["base"] = pm->base.probs;
    } else if (const auto* ep = std::get_if<EllipticPerturbation>(&model.variant)) {
        var["type"] = "elliptic_perturbation";
        var["base"] = ep->base.probs;
        var["spread"] = ep->spread;
    } else {
        const auto& mix = std::get<TwoKernelMixture>(model.variant);
        var["type"] = "two_kernel_mixture";
        var["weight"] = mix.weight;
        var["k1"] = mix.k1.probs;
        var["k2"] = mix.k2.probs;
    }
    j["variant"] = var;
    return j;
}

}  // namespace rwre
