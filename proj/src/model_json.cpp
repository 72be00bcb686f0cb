#include "hawkesfield/model_json.hpp"

#include "hawkesfield/errors.hpp"

namespace hawkesfield {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ConfigError("expected an object", path);
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing field", path + "/" + key);
  return *it;
}

double number(const json& j, const char* key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_number()) throw ConfigError("expected a number", path + "/" + key);
  return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  return number(j, key, path);
}

std::size_t count(const json& j, const char* key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw ConfigError("expected a positive integer", path + "/" + key);
  return v.get<std::size_t>();
}

// Accepts a scalar when dim == 1.
std::vector<double> vector_of(const json& j, const char* key, std::size_t dim,
                              const std::string& path) {
  const json& v = field(j, key, path);
  const std::string p = path + "/" + key;
  if (v.is_number() && dim == 1) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError("expected an array", p);
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) throw ConfigError("expected a number", p + "/" + std::to_string(k));
    out.push_back(v[k].get<double>());
  }
  if (dim != 0 && out.size() != dim)
    throw ConfigError("expected " + std::to_string(dim) + " entries", p);
  return out;
}

std::string variant_of(const json& j, const std::string& path) {
  const json& v = field(j, "variant", path);
  if (!v.is_string()) throw ConfigError("expected a string", path + "/variant");
  return v.get<std::string>();
}

template <class F>
auto rethrow_with_path(const std::string& path, F&& make) {
  try {
    return make();
  } catch (const ConfigError& e) {
    if (!e.path().empty()) throw;
    throw ConfigError(e.what(), path);
  }
}

}  // namespace

FiringRateFn firing_rate_from_json(const json& j, const std::string& path) {
  const std::string v = variant_of(j, path);
  return rethrow_with_path(path, [&] {
    if (v == "sigmoid")
      return FiringRateFn(Sigmoid{number(j, "f_max", path), number(j, "gain", path),
                                  number_or(j, "threshold", 0.0, path)});
    if (v == "piecewise_linear")
      return FiringRateFn(PiecewiseLinear{number(j, "slope", path), number(j, "floor", path),
                                          number(j, "ceiling", path)});
    if (v == "rectified_linear")
      return FiringRateFn(
          RectifiedLinear{number(j, "slope", path), number_or(j, "offset", 0.0, path)});
    if (v == "constant") return FiringRateFn(ConstantRate{number(j, "c", path)});
    throw ConfigError("unknown firing_rate variant '" + v + "'", path + "/variant");
  });
}

SynapticWeightFn weight_from_json(const json& j, std::size_t dim, const std::string& path) {
  const std::string v = variant_of(j, path);
  return rethrow_with_path(path, [&] {
    if (v == "constant") return SynapticWeightFn(ConstantWeight{number(j, "kappa", path)}, dim);
    if (v == "gaussian")
      return SynapticWeightFn(
          GaussianWeight{number(j, "amplitude", path), number(j, "width", path)}, dim);
    if (v == "mexican_hat")
      return SynapticWeightFn(MexicanHatWeight{number(j, "a1", path), number(j, "sigma1", path),
                                               number(j, "a2", path), number(j, "sigma2", path)},
                              dim);
    if (v == "separable_product")
      return SynapticWeightFn(
          SeparableProductWeight{number(j, "amplitude", path), number(j, "width_pre", path),
                                 number(j, "width_post", path)},
          dim);
    throw ConfigError("unknown weight variant '" + v + "'", path + "/variant");
  });
}

InitialCondition initial_from_json(const json& j, std::size_t dim, const std::string& path) {
  const std::string v = variant_of(j, path);
  return rethrow_with_path(path, [&] {
    if (v == "constant") return InitialCondition(ConstantInitial{number(j, "u", path)}, dim);
    if (v == "gaussian_bump")
      return InitialCondition(GaussianBump{number(j, "height", path),
                                           vector_of(j, "center", dim, path),
                                           number(j, "width", path)},
                              dim);
    throw ConfigError("unknown initial variant '" + v + "'", path + "/variant");
  });
}

SpatialMeasure measure_from_json(const json& j, const std::string& path) {
  const std::string v = variant_of(j, path);
  const double beta = number_or(j, "beta", 1.0, path);
  return rethrow_with_path(path, [&] {
    if (v == "uniform_box")
      return SpatialMeasure(UniformBox{count(j, "d", path), number(j, "r", path)}, beta);
    if (v == "gaussian") {
      const std::size_t d = count(j, "d", path);
      return SpatialMeasure(GaussianMeasure{d, vector_of(j, "mean", d, path),
                                            vector_of(j, "cov_diag", d, path)},
                            beta);
    }
    if (v == "dirac_mixture") {
      const json& pts = field(j, "points", path);
      if (!pts.is_array() || pts.empty())
        throw ConfigError("expected a nonempty array", path + "/points");
      PointSet points;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string p = path + "/points/" + std::to_string(i);
        std::vector<double> x;
        if (pts[i].is_number()) {
          x.push_back(pts[i].get<double>());
        } else if (pts[i].is_array()) {
          for (const auto& c : pts[i]) {
            if (!c.is_number()) throw ConfigError("expected a number", p);
            x.push_back(c.get<double>());
          }
        } else {
          throw ConfigError("expected a point", p);
        }
        if (!points.empty() && x.size() != points.dim())
          throw ConfigError("point dimension mismatch", p);
        points.push_back(x);
      }
      return SpatialMeasure(DiracMixture{points, vector_of(j, "weights", points.size(), path)},
                            beta);
    }
    if (v == "grid_density") {
      auto lo = vector_of(j, "lo", 0, path);
      auto hi = vector_of(j, "hi", lo.size(), path);
      const std::size_t res = count(j, "resolution", path);
      std::size_t cells = 1;
      for (std::size_t k = 0; k < lo.size(); ++k) cells *= res;
      return SpatialMeasure(GridDensity{lo, hi, res, vector_of(j, "masses", cells, path)}, beta);
    }
    throw ConfigError("unknown rho variant '" + v + "'", path + "/variant");
  });
}

ModelParams model_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError("expected an object", path.empty() ? "/" : path);
  SpatialMeasure rho = measure_from_json(field(j, "rho", path), path + "/rho");
  const std::size_t d = rho.dim();
  ModelParams params{firing_rate_from_json(field(j, "firing_rate", path), path + "/firing_rate"),
                     weight_from_json(field(j, "weight", path), d, path + "/weight"),
                     initial_from_json(field(j, "initial", path), d, path + "/initial"),
                     number(j, "alpha", path), std::move(rho)};
  if (params.alpha < 0) throw ConfigError("alpha must be >= 0", path + "/alpha");
  params.validate();
  return params;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

json to_json(const ModelParams& p) {
  json out;
  out["alpha"] = p.alpha;
  out["firing_rate"] = std::visit(
      overloaded{
          [](const Sigmoid& s) {
            return json{{"variant", "sigmoid"}, {"f_max", s.f_max}, {"gain", s.gain},
                        {"threshold", s.threshold}};
          },
          [](const PiecewiseLinear& s) {
            return json{{"variant", "piecewise_linear"}, {"slope", s.slope},
                        {"floor", s.floor}, {"ceiling", s.ceiling}};
          },
          [](const RectifiedLinear& s) {
            return json{{"variant", "rectified_linear"}, {"slope", s.slope}, {"offset", s.offset}};
          },
          [](const ConstantRate& s) { return json{{"variant", "constant"}, {"c", s.c}}; },
      },
      p.f.variant());
  out["weight"] = std::visit(
      overloaded{
          [](const ConstantWeight& w) { return json{{"variant", "constant"}, {"kappa", w.kappa}}; },
          [](const GaussianWeight& w) {
            return json{{"variant", "gaussian"}, {"amplitude", w.amplitude}, {"width", w.width}};
          },
          [](const MexicanHatWeight& w) {
            return json{{"variant", "mexican_hat"}, {"a1", w.a1}, {"sigma1", w.sigma1},
                        {"a2", w.a2}, {"sigma2", w.sigma2}};
          },
          [](const SeparableProductWeight& w) {
            return json{{"variant", "separable_product"}, {"amplitude", w.amplitude},
                        {"width_pre", w.width_pre}, {"width_post", w.width_post}};
          },
      },
      p.w.variant());
  out["initial"] = std::visit(
      overloaded{
          [](const ConstantInitial& c) { return json{{"variant", "constant"}, {"u", c.u}}; },
          [](const GaussianBump& g) {
            return json{{"variant", "gaussian_bump"}, {"height", g.height},
                        {"center", g.center}, {"width", g.width}};
          },
      },
      p.u0.variant());
  json rho = std::visit(
      overloaded{
          [](const UniformBox& u) { return json{{"variant", "uniform_box"}, {"d", u.d}, {"r", u.r}}; },
          [](const GaussianMeasure& g) {
            return json{{"variant", "gaussian"}, {"d", g.d}, {"mean", g.mean},
                        {"cov_diag", g.cov_diag}};
          },
          [](const DiracMixture& m) {
            json pts = json::array();
            for (std::size_t i = 0; i < m.points.size(); ++i) {
              auto p = m.points[i];
              pts.push_back(std::vector<double>(p.begin(), p.end()));
            }
            return json{{"variant", "dirac_mixture"}, {"points", pts}, {"weights", m.weights}};
          },
          [](const GridDensity& g) {
            return json{{"variant", "grid_density"}, {"lo", g.lo}, {"hi", g.hi},
                        {"resolution", g.resolution}, {"masses", g.masses}};
          },
      },
      p.rho.variant());
  rho["beta"] = p.rho.exp_moment_rate();
  out["rho"] = rho;
  return out;
}

}  // namespace hawkesfield
