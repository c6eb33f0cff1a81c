#include "model_json.hpp"

#include <stdexcept>

namespace coordsim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& message) {
  throw std::invalid_argument("config: " + message);
}

double number_at(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail(where + " is missing key '" + key + "'");
  if (!j[key].is_number()) fail(where + "." + key + " must be a number");
  return j[key].get<double>();
}

int int_at(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail(where + " is missing key '" + key + "'");
  if (!j[key].is_number_integer()) fail(where + "." + key + " must be an integer");
  return j[key].get<int>();
}

int int_or(const json& j, const std::string& key, int fallback) {
  return j.contains(key) ? j[key].get<int>() : fallback;
}

double number_or(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? j[key].get<double>() : fallback;
}

GraphSpec graph_from_json(const json& g) {
  if (!g.contains("kind")) fail("graph is missing key 'kind'");
  std::string kind = g["kind"].get<std::string>();
  if (kind == "complete") return GraphSpec::complete(int_at(g, "n", "graph"));
  if (kind == "line") return GraphSpec::line(int_at(g, "n", "graph"));
  if (kind == "grid") return GraphSpec::grid(int_at(g, "K", "graph"), int_at(g, "d", "graph"));
  if (kind == "torus")
    return GraphSpec::torus(int_at(g, "K", "graph"), int_at(g, "d", "graph"));
  if (kind == "rooted_tree")
    return GraphSpec::rooted_tree(int_at(g, "d", "graph"), int_at(g, "depth", "graph"));
  if (kind == "explicit") {
    if (!g.contains("edges") || !g["edges"].is_array()) fail("explicit graph needs 'edges'");
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : g["edges"]) {
      if (!e.is_array() || e.size() != 2) fail("each edge must be a pair [a,b]");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return GraphSpec::explicit_edges(int_at(g, "n", "graph"), edges);
  }
  fail("unknown graph kind '" + kind + "'");
}

}  // namespace

AtomicMeasure measure_from_json(const json& atoms, const std::string& where) {
  if (!atoms.is_array()) fail(where + ".atoms must be an array");
  std::vector<Atom> list;
  for (const auto& a : atoms) {
    double y = number_at(a, "y", where + ".atoms[]");
    double mass = number_at(a, "mass", where + ".atoms[]");
    if (mass < 0.0) fail(where + ".atoms[].mass must be >= 0");
    list.push_back(Atom{y, mass});
  }
  try {
    return AtomicMeasure(list);
  } catch (const std::invalid_argument& e) {
    fail(where + ": " + e.what());
  }
}

namespace {

void apply_measures(ModelSpec& spec, const json& measures) {
  auto entries = [&](const char* family) -> json {
    if (!measures.contains(family)) return json::array();
    if (!measures[family].is_array()) fail(std::string("measures.") + family + " must be an array");
    return measures[family];
  };
  for (const auto& e : entries("coalescence")) {
    int v = int_at(e, "from", "measures.coalescence[]");
    spec.set_coalescence(v, measure_from_json(e.value("atoms", json::array()),
                                              "measures.coalescence[]"));
  }
  for (const auto& e : entries("death")) {
    int v = int_at(e, "from", "measures.death[]");
    spec.set_death(v, measure_from_json(e.value("atoms", json::array()), "measures.death[]"));
  }
  for (const auto& e : entries("reproduction")) {
    int v = int_at(e, "from", "measures.reproduction[]");
    int u = int_at(e, "to", "measures.reproduction[]");
    spec.set_reproduction(v, u, measure_from_json(e.value("atoms", json::array()),
                                                  "measures.reproduction[]"));
  }
  for (const auto& e : entries("migration")) {
    int v = int_at(e, "from", "measures.migration[]");
    int u = int_at(e, "to", "measures.migration[]");
    spec.set_migration(v, u, measure_from_json(e.value("atoms", json::array()),
                                               "measures.migration[]"));
  }
}

AtomicMeasure measure_param(const json& params, const std::string& key,
                            const AtomicMeasure& fallback) {
  if (!params.contains(key)) return fallback;
  return measure_from_json(params[key], "preset." + key);
}

}  // namespace

ModelSpec preset_from_json(const std::string& name, const json& params) {
  auto need = [&](const char* key) {
    if (!params.contains(key))
      fail("preset '" + name + "' is missing parameter '" + key + "'");
  };
  if (name == "yule") {
    need("r");
    return presets::yule(number_at(params, "r", "preset"), number_or(params, "w", 0.0));
  }
  if (name == "structured_lambda_coalescent") {
    need("lambda");
    need("m");
    std::vector<AtomicMeasure> lambda;
    for (const auto& l : params["lambda"])
      lambda.push_back(measure_from_json(l, "preset.lambda[]"));
    std::vector<std::vector<double>> m;
    for (const auto& row : params["m"]) m.push_back(row.get<std::vector<double>>());
    return presets::structured_lambda_coalescent(lambda, m);
  }
  if (name == "binomial_disasters") {
    need("p");
    need("r");
    return presets::binomial_disasters(number_at(params, "p", "preset"),
                                       number_at(params, "r", "preset"));
  }
  if (name == "seedbank_simultaneous") {
    need("m01");
    need("m10");
    return presets::seedbank_simultaneous(
        measure_from_json(params["m01"], "preset.m01"),
        measure_from_json(params["m10"], "preset.m10"), number_or(params, "c1", 1.0));
  }
  if (name == "spatial_seedbank") {
    need("n");
    need("K");
    need("e");
    need("d");
    need("a");
    std::vector<std::vector<double>> a;
    for (const auto& row : params["a"]) a.push_back(row.get<std::vector<double>>());
    return presets::spatial_seedbank(int_at(params, "n", "preset"),
                                     number_at(params, "K", "preset"),
                                     params["e"].get<std::vector<double>>(),
                                     params["d"].get<std::vector<double>>(), a);
  }
  if (name == "coordinated_bc") {
    need("lambda");
    need("r");
    return presets::coordinated_bc(measure_from_json(params["lambda"], "preset.lambda"),
                                   measure_from_json(params["r"], "preset.r"));
  }
  if (name == "hierarchical_moran") {
    need("n");
    need("c");
    need("c_ind");
    need("c_coord");
    return presets::hierarchical_moran(
        int_at(params, "n", "preset"), number_at(params, "c", "preset"),
        number_at(params, "c_ind", "preset"), number_at(params, "c_coord", "preset"),
        measure_param(params, "r", AtomicMeasure::zero()),
        measure_param(params, "d", AtomicMeasure::zero()));
  }
  if (name == "kingman_erosion") {
    need("n");
    need("c");
    need("c_ind");
    need("c_coord");
    return presets::kingman_erosion(
        int_at(params, "n", "preset"), number_at(params, "c", "preset"),
        number_at(params, "c_ind", "preset"), number_at(params, "c_coord", "preset"));
  }
  if (name == "pam_branching") {
    need("K");
    need("d");
    need("xi_plus");
    need("xi_minus");
    GraphSpec box = params.value("torus", false)
                        ? GraphSpec::torus(int_at(params, "K", "preset"),
                                           int_at(params, "d", "preset"))
                        : GraphSpec::grid(int_at(params, "K", "preset"),
                                          int_at(params, "d", "preset"));
    return presets::pam_branching(box, params["xi_plus"].get<std::vector<double>>(),
                                  params["xi_minus"].get<std::vector<double>>());
  }
  if (name == "nested_coalescent") {
    need("lambda");
    need("n_islands");
    return presets::nested_coalescent(measure_from_json(params["lambda"], "preset.lambda"),
                                      int_at(params, "n_islands", "preset"));
  }
  if (name == "peripatric") {
    need("alpha");
    need("alpha_prime");
    need("c");
    need("m01");
    need("m10");
    return presets::peripatric(number_at(params, "alpha", "preset"),
                               number_at(params, "alpha_prime", "preset"),
                               number_at(params, "c", "preset"),
                               measure_from_json(params["m01"], "preset.m01"),
                               measure_from_json(params["m10"], "preset.m10"));
  }
  if (name == "binary_contact_path") {
    need("D");
    need("R");
    GraphSpec g = graph_from_json(params.contains("graph")
                                      ? params["graph"]
                                      : json{{"kind", "torus"},
                                             {"K", int_or(params, "K", 6)},
                                             {"d", int_or(params, "d", 2)}});
    return presets::binary_contact_path(g, number_at(params, "D", "preset"),
                                        number_at(params, "R", "preset"));
  }
  if (name == "tree_brw") {
    need("d");
    need("depth");
    need("r");
    need("mu");
    return presets::tree_brw(int_at(params, "d", "preset"), int_at(params, "depth", "preset"),
                             number_at(params, "r", "preset"),
                             number_at(params, "mu", "preset"));
  }
  fail("unknown preset '" + name + "'");
}

ModelSpec model_from_json(const json& j) {
  if (!j.is_object()) fail("model must be an object");
  if (j.contains("preset")) {
    const json& p = j["preset"];
    if (!p.contains("name")) fail("model.preset is missing 'name'");
    return preset_from_json(p["name"].get<std::string>(),
                            p.value("params", json::object()));
  }
  if (!j.contains("graph")) fail("model needs either 'preset' or 'graph'");
  ModelSpec spec(graph_from_json(j["graph"]));
  if (j.contains("measures")) apply_measures(spec, j["measures"]);
  spec.validate();
  return spec;
}

nlohmann::json type_signature_to_json(const TypeSignature& type) {
  json out;
  out["coalescence"] = type.coalescence;
  out["death"] = type.death;
  out["reproduction"] = type.reproduction;
  out["migration"] = type.migration;
  return out;
}

}  // namespace coordsim
