#include "ihom/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ihom {

namespace {

using nlohmann::json;

const std::map<std::string, Objective> kObjectives = {
    {"bulk", Objective::bulk},
    {"shear", Objective::shear},
    {"npr-relaxed", Objective::npr_relaxed},
    {"npr-log", Objective::npr_log}};

const std::map<std::string, Symmetry> kSymmetries = {{"none", Symmetry::none},
                                                     {"reflect3", Symmetry::reflect3},
                                                     {"reflect6", Symmetry::reflect6},
                                                     {"rotate3", Symmetry::rotate3}};

const std::map<std::string, FilterKernel> kKernels = {{"linear", FilterKernel::linear},
                                                      {"spline4", FilterKernel::spline4}};

const std::map<std::string, FilterPlacement> kPlacements = {
    {"density", FilterPlacement::density}, {"sensitivity", FilterPlacement::sensitivity}};

const std::map<std::string, Precision> kPrecisions = {{"mixed", Precision::mixed},
                                                      {"double", Precision::all_double}};

template <class M>
typename M::mapped_type lookup(const M& m, const std::string& key, const char* what) {
  const auto it = m.find(key);
  if (it == m.end()) throw std::invalid_argument(std::string("unknown ") + what + ": " + key);
  return it->second;
}

void set_init(RunConfig& cfg, const std::string& s) {
  if (s == "constant") {
    cfg.init = InitKind::constant;
  } else if (s == "trig") {
    cfg.init = InitKind::trig;
  } else if (s.rfind("file:", 0) == 0) {
    cfg.init = InitKind::file;
    cfg.init_file = s.substr(5);
    if (cfg.init_file.empty()) throw std::invalid_argument("init file path is empty");
  } else {
    throw std::invalid_argument("unknown init: " + s + " (constant | trig | file:<path>)");
  }
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const json&)> apply;
};

void validate(const RunConfig& cfg) {
  if (cfg.reso < 4) throw std::invalid_argument("reso must be >= 4");
  if (!(cfg.vol > 0.0 && cfg.vol <= 1.0)) throw std::invalid_argument("vol must lie in (0, 1]");
  if (!(cfg.youngs > 0.0)) throw std::invalid_argument("E must be positive");
  if (!(cfg.poisson > -1.0 && cfg.poisson < 0.5))
    throw std::invalid_argument("nu must lie in (-1, 0.5)");
  if (!(cfg.penal >= 1.0)) throw std::invalid_argument("penal must be >= 1");
  if (cfg.filter_radius < 0.0) throw std::invalid_argument("filter-radius must be >= 0");
  if (cfg.max_iter < 1) throw std::invalid_argument("max-iter must be >= 1");
  if (!(cfg.step > 0.0 && cfg.step < 1.0)) throw std::invalid_argument("step must lie in (0, 1)");
  if (!(cfg.damp > 0.0 && cfg.damp <= 1.0)) throw std::invalid_argument("damp must lie in (0, 1]");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (cfg.max_cycles < 1) throw std::invalid_argument("max-cycles must be >= 1");
  if (cfg.basis_n < 1 || cfg.basis_n > 8)
    throw std::invalid_argument("basis-n must lie in [1, 8]");
  if (cfg.workers < 0) throw std::invalid_argument("workers must be >= 0");
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"reso", [](RunConfig& c, const json& v) { c.reso = v.get<int>(); }},
      {"vol", [](RunConfig& c, const json& v) { c.vol = v.get<double>(); }},
      {"E", [](RunConfig& c, const json& v) { c.youngs = v.get<double>(); }},
      {"nu", [](RunConfig& c, const json& v) { c.poisson = v.get<double>(); }},
      {"obj",
       [](RunConfig& c, const json& v) {
         c.obj = lookup(kObjectives, v.get<std::string>(), "objective");
       }},
      {"beta", [](RunConfig& c, const json& v) { c.beta = v.get<double>(); }},
      {"eta", [](RunConfig& c, const json& v) { c.eta = v.get<double>(); }},
      {"tau", [](RunConfig& c, const json& v) { c.tau = v.get<double>(); }},
      {"gamma", [](RunConfig& c, const json& v) { c.gamma = v.get<double>(); }},
      {"penal", [](RunConfig& c, const json& v) { c.penal = v.get<double>(); }},
      {"filter-radius", [](RunConfig& c, const json& v) { c.filter_radius = v.get<double>(); }},
      {"filter-placement",
       [](RunConfig& c, const json& v) {
         c.filter_placement = lookup(kPlacements, v.get<std::string>(), "filter placement");
       }},
      {"kernel",
       [](RunConfig& c, const json& v) {
         c.kernel = lookup(kKernels, v.get<std::string>(), "kernel");
       }},
      {"sym",
       [](RunConfig& c, const json& v) {
         c.sym = lookup(kSymmetries, v.get<std::string>(), "symmetry");
       }},
      {"init", [](RunConfig& c, const json& v) { set_init(c, v.get<std::string>()); }},
      {"basis-n", [](RunConfig& c, const json& v) { c.basis_n = v.get<int>(); }},
      {"seed", [](RunConfig& c, const json& v) { c.seed = v.get<std::uint64_t>(); }},
      {"max-iter", [](RunConfig& c, const json& v) { c.max_iter = v.get<int>(); }},
      {"step", [](RunConfig& c, const json& v) { c.step = v.get<double>(); }},
      {"damp", [](RunConfig& c, const json& v) { c.damp = v.get<double>(); }},
      {"tol", [](RunConfig& c, const json& v) { c.tol = v.get<double>(); }},
      {"max-cycles", [](RunConfig& c, const json& v) { c.max_cycles = v.get<int>(); }},
      {"precision",
       [](RunConfig& c, const json& v) {
         c.precision = lookup(kPrecisions, v.get<std::string>(), "precision");
       }},
      {"workers", [](RunConfig& c, const json& v) { c.workers = v.get<int>(); }},
      {"out", [](RunConfig& c, const json& v) { c.out_dir = v.get<std::string>(); }},
  };
  return f;
}

void apply_json(RunConfig& cfg, const json& j) {
  std::set<std::string> known;
  for (const auto& f : fields()) known.insert(f.key);
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("unknown config key: " + key);
    for (const auto& f : fields())
      if (key == f.key) f.apply(cfg, value);
  }
}

}  // namespace

RunConfig parse_config(int argc, const char* const* argv) {
  RunConfig cfg;
  // Two passes: a config file (if any) first, then flags on top.
  std::map<std::string, std::string> flags;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a.rfind("--", 0) != 0) throw std::invalid_argument("unexpected argument: " + a);
    a = a.substr(2);
    std::string value;
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      value = a.substr(eq + 1);
      a = a.substr(0, eq);
    } else {
      if (i + 1 >= argc) throw std::invalid_argument("missing value for --" + a);
      value = argv[++i];
    }
    flags[a] = value;
  }

  if (const auto it = flags.find("config"); it != flags.end()) {
    std::ifstream in(it->second);
    if (!in) throw std::invalid_argument("cannot open config file: " + it->second);
    json j;
    in >> j;
    apply_json(cfg, j);
    flags.erase(it);
  }

  json overlay = json::object();
  for (const auto& [key, value] : flags) {
    // Flags arrive as strings; route them through the JSON appliers with the
    // right type.
    static const std::set<std::string> strings = {"obj",    "kernel", "sym",
                                                  "init",   "out",    "precision",
                                                  "filter-placement"};
    static const std::set<std::string> ints = {"reso", "basis-n", "seed", "max-iter",
                                               "max-cycles", "workers"};
    if (strings.count(key)) {
      overlay[key] = value;
    } else if (ints.count(key)) {
      try {
        overlay[key] = std::stoll(value);
      } catch (const std::exception&) {
        throw std::invalid_argument("invalid integer for --" + key + ": " + value);
      }
    } else {
      try {
        std::size_t pos = 0;
        overlay[key] = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw std::invalid_argument("invalid number for --" + key + ": " + value);
      }
    }
  }
  apply_json(cfg, overlay);
  validate(cfg);
  return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["reso"] = cfg.reso;
  j["vol"] = cfg.vol;
  j["E"] = cfg.youngs;
  j["nu"] = cfg.poisson;
  j["obj"] = objective_name(cfg.obj);
  j["beta"] = cfg.beta;
  j["eta"] = cfg.eta;
  j["tau"] = cfg.tau;
  j["gamma"] = cfg.gamma;
  j["penal"] = cfg.penal;
  j["filter-radius"] = cfg.filter_radius;
  j["filter-placement"] =
      cfg.filter_placement == FilterPlacement::density ? "density" : "sensitivity";
  j["kernel"] = kernel_name(cfg.kernel);
  j["sym"] = symmetry_name(cfg.sym);
  j["init"] = cfg.init == InitKind::constant ? "constant"
              : cfg.init == InitKind::trig   ? "trig"
                                             : "file:" + cfg.init_file;
  j["basis-n"] = cfg.basis_n;
  j["seed"] = cfg.seed;
  j["max-iter"] = cfg.max_iter;
  j["step"] = cfg.step;
  j["damp"] = cfg.damp;
  j["tol"] = cfg.tol;
  j["max-cycles"] = cfg.max_cycles;
  j["precision"] = cfg.precision == Precision::mixed ? "mixed" : "double";
  j["workers"] = cfg.workers;
  j["out"] = cfg.out_dir;
  return j.dump(2);
}

std::string objective_name(Objective o) {
  switch (o) {
    case Objective::bulk: return "bulk";
    case Objective::shear: return "shear";
    case Objective::npr_relaxed: return "npr-relaxed";
    case Objective::npr_log: return "npr-log";
  }
  return "?";
}

std::string symmetry_name(Symmetry s) {
  switch (s) {
    case Symmetry::none: return "none";
    case Symmetry::reflect3: return "reflect3";
    case Symmetry::reflect6: return "reflect6";
    case Symmetry::rotate3: return "rotate3";
  }
  return "?";
}

std::string kernel_name(FilterKernel k) {
  return k == FilterKernel::linear ? "linear" : "spline4";
}

}  // namespace ihom
