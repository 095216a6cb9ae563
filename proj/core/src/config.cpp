#include "erlq/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "erlq/errors.hpp"

namespace erlq {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail(path + "." + it.key(), "unknown key");
  }
}

const json& require(const json& obj, const std::string& path,
                    const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required key");
  return *it;
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Vec as_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<int>(i)) = as_number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Mat as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected an array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  Mat m;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].empty())
      fail(row_path, "expected a non-empty array");
    if (i == 0) {
      cols = j[i].size();
      m.resize(static_cast<int>(rows), static_cast<int>(cols));
    } else if (j[i].size() != cols) {
      fail(row_path, "ragged matrix rows");
    }
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<int>(i), static_cast<int>(c)) =
          as_number(j[i][c], row_path + "[" + std::to_string(c) + "]");
  }
  return m;
}

void parse_system(const json& j, SystemParams* sys) {
  const std::string path = "system";
  if (!j.is_object()) fail(path, "expected an object");
  check_keys(j, path,
             {"a", "b", "c", "d", "q", "r", "gamma", "tau", "init", "noise"});
  sys->A = as_number(require(j, path, "a"), path + ".a");
  Vec b = as_vector(require(j, path, "b"), path + ".b");
  sys->B = b.transpose();
  sys->C = as_number(require(j, path, "c"), path + ".c");
  sys->D = as_matrix(require(j, path, "d"), path + ".d");
  sys->Q = as_number(require(j, path, "q"), path + ".q");
  sys->R = as_matrix(require(j, path, "r"), path + ".r");
  sys->gamma = as_number(require(j, path, "gamma"), path + ".gamma");
  sys->tau = as_number(require(j, path, "tau"), path + ".tau");
  if (const json* init = find(j, "init")) {
    const std::string ipath = path + ".init";
    if (!init->is_object()) fail(ipath, "expected an object");
    check_keys(*init, ipath, {"kind", "param"});
    if (const json* kind = find(*init, "kind")) {
      const std::string v = as_string(*kind, ipath + ".kind");
      if (v == "two-point")
        sys->init.kind = InitKind::kTwoPoint;
      else if (v == "uniform")
        sys->init.kind = InitKind::kUniform;
      else if (v == "gaussian")
        sys->init.kind = InitKind::kGaussian;
      else
        fail(ipath + ".kind", "expected two-point, uniform or gaussian");
    }
    if (const json* param = find(*init, "param"))
      sys->init.param = as_number(*param, ipath + ".param");
  }
  if (const json* noise = find(j, "noise")) {
    const std::string v = as_string(*noise, path + ".noise");
    if (v == "gaussian")
      sys->noise = NoiseKind::kGaussian;
    else if (v == "bounded")
      sys->noise = NoiseKind::kBounded;
    else
      fail(path + ".noise", "expected gaussian or bounded");
  }
}

std::string dim_text(int rows, int cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& root) {
  if (!root.is_object()) throw ConfigError("config: expected an object");
  check_keys(root, "config",
             {"system", "policy", "solver", "rpg", "sbrpg", "gradcheck",
              "bounds", "output", "seed"});

  ExperimentConfig cfg;
  parse_system(require(root, "config", "system"), &cfg.system);
  cfg.system.validate();
  const int n = cfg.system.n();

  cfg.k0 = Vec::Zero(n);
  cfg.sigma0 = 0.5 * Mat::Identity(n, n);
  if (const json* policy = find(root, "policy")) {
    const std::string path = "policy";
    if (!policy->is_object()) fail(path, "expected an object");
    check_keys(*policy, path, {"k", "sigma"});
    if (const json* k = find(*policy, "k")) {
      cfg.k0 = as_vector(*k, path + ".k");
      if (cfg.k0.size() != n)
        fail(path + ".k", "expected " + std::to_string(n) + " entries");
    }
    if (const json* sigma = find(*policy, "sigma")) {
      cfg.sigma0 = as_matrix(*sigma, path + ".sigma");
      if (cfg.sigma0.rows() != n || cfg.sigma0.cols() != n)
        fail(path + ".sigma", "expected a " + dim_text(n, n) + " matrix");
    }
  }

  if (const json* solver = find(root, "solver")) {
    const std::string path = "solver";
    if (!solver->is_object()) fail(path, "expected an object");
    check_keys(*solver, path, {"are_tol", "max_iter"});
    if (const json* v = find(*solver, "are_tol"))
      cfg.solver.are_tol = as_number(*v, path + ".are_tol");
    if (const json* v = find(*solver, "max_iter"))
      cfg.solver.max_iter = as_int(*v, path + ".max_iter");
  }

  if (const json* rpg = find(root, "rpg")) {
    const std::string path = "rpg";
    if (!rpg->is_object()) fail(path, "expected an object");
    check_keys(*rpg, path,
               {"eta1", "eta2", "epsilon", "max_iter", "recompute_steps"});
    if (const json* v = find(*rpg, "eta1"))
      cfg.rpg.eta1 = as_number(*v, path + ".eta1");
    if (const json* v = find(*rpg, "eta2"))
      cfg.rpg.eta2 = as_number(*v, path + ".eta2");
    if (const json* v = find(*rpg, "epsilon"))
      cfg.rpg.epsilon = as_number(*v, path + ".epsilon");
    if (const json* v = find(*rpg, "max_iter"))
      cfg.rpg.max_iter = as_int(*v, path + ".max_iter");
    if (const json* v = find(*rpg, "recompute_steps"))
      cfg.rpg.recompute_steps = as_bool(*v, path + ".recompute_steps");
  }

  if (const json* sbrpg = find(root, "sbrpg")) {
    const std::string path = "sbrpg";
    if (!sbrpg->is_object()) fail(path, "expected an object");
    check_keys(*sbrpg, path,
               {"samples", "horizon", "radius_k", "radius_sigma", "eta1",
                "eta2", "iterations", "coefficient_mode", "threads",
                "exact_cost"});
    if (const json* v = find(*sbrpg, "samples"))
      cfg.sbrpg.samples = as_int(*v, path + ".samples");
    if (const json* v = find(*sbrpg, "horizon"))
      cfg.sbrpg.horizon = as_int(*v, path + ".horizon");
    if (const json* v = find(*sbrpg, "radius_k"))
      cfg.sbrpg.radius_k = as_number(*v, path + ".radius_k");
    if (const json* v = find(*sbrpg, "radius_sigma"))
      cfg.sbrpg.radius_sigma = as_number(*v, path + ".radius_sigma");
    if (const json* v = find(*sbrpg, "eta1"))
      cfg.sbrpg.eta1 = as_number(*v, path + ".eta1");
    if (const json* v = find(*sbrpg, "eta2"))
      cfg.sbrpg.eta2 = as_number(*v, path + ".eta2");
    if (const json* v = find(*sbrpg, "iterations"))
      cfg.sbrpg.iterations = as_int(*v, path + ".iterations");
    if (const json* v = find(*sbrpg, "coefficient_mode")) {
      const std::string mode = as_string(*v, path + ".coefficient_mode");
      if (mode == "ambient-dim")
        cfg.sbrpg.coefficient_mode = CoefficientMode::kAmbientDim;
      else if (mode == "literal")
        cfg.sbrpg.coefficient_mode = CoefficientMode::kLiteral;
      else
        fail(path + ".coefficient_mode", "expected ambient-dim or literal");
    }
    if (const json* v = find(*sbrpg, "threads"))
      cfg.sbrpg.threads = as_int(*v, path + ".threads");
    if (const json* v = find(*sbrpg, "exact_cost"))
      cfg.sbrpg.exact_cost = as_bool(*v, path + ".exact_cost");
  }

  if (const json* gradcheck = find(root, "gradcheck")) {
    const std::string path = "gradcheck";
    if (!gradcheck->is_object()) fail(path, "expected an object");
    check_keys(*gradcheck, path, {"samples", "step"});
    if (const json* v = find(*gradcheck, "samples"))
      cfg.gradcheck.samples = as_int(*v, path + ".samples");
    if (const json* v = find(*gradcheck, "step"))
      cfg.gradcheck.step = as_number(*v, path + ".step");
  }

  if (const json* bounds = find(root, "bounds")) {
    const std::string path = "bounds";
    if (!bounds->is_object()) fail(path, "expected an object");
    check_keys(*bounds, path,
               {"epsilon", "kappa", "growth_constant", "schedule"});
    if (const json* v = find(*bounds, "epsilon"))
      cfg.bounds.epsilon = as_number(*v, path + ".epsilon");
    if (const json* v = find(*bounds, "kappa"))
      cfg.bounds.kappa = as_number(*v, path + ".kappa");
    if (const json* v = find(*bounds, "growth_constant"))
      cfg.bounds.growth_constant = as_number(*v, path + ".growth_constant");
    if (const json* v = find(*bounds, "schedule"))
      cfg.bounds.schedule = as_bool(*v, path + ".schedule");
  }

  if (const json* output = find(root, "output")) {
    const std::string path = "output";
    if (!output->is_object()) fail(path, "expected an object");
    check_keys(*output, path, {"dir", "csv", "svg", "record_every"});
    if (const json* v = find(*output, "dir"))
      cfg.output.dir = as_string(*v, path + ".dir");
    if (const json* v = find(*output, "csv"))
      cfg.output.csv = as_bool(*v, path + ".csv");
    if (const json* v = find(*output, "svg"))
      cfg.output.svg = as_bool(*v, path + ".svg");
    if (const json* v = find(*output, "record_every")) {
      cfg.output.record_every = as_int(*v, path + ".record_every");
      if (cfg.output.record_every < 1)
        fail(path + ".record_every", "must be positive");
    }
  }
  cfg.rpg.record_every = cfg.output.record_every;
  cfg.sbrpg.record_every = cfg.output.record_every;

  if (const json* seed = find(root, "seed")) {
    if (!seed->is_number_integer() ||
        (seed->is_number_integer() && !seed->is_number_unsigned() &&
         seed->get<long long>() < 0))
      fail("seed", "expected a non-negative integer");
    cfg.seed = seed->get<std::uint64_t>();
    cfg.has_seed = true;
  }
  cfg.sbrpg.seed = cfg.seed;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(root);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  using nlohmann::json;
  const auto vec_json = [](const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
  };
  const auto row_json = [](const RowVec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
  };
  const auto mat_json = [](const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };

  json sys;
  sys["a"] = cfg.system.A;
  sys["b"] = row_json(cfg.system.B);
  sys["c"] = cfg.system.C;
  sys["d"] = mat_json(cfg.system.D);
  sys["q"] = cfg.system.Q;
  sys["r"] = mat_json(cfg.system.R);
  sys["gamma"] = cfg.system.gamma;
  sys["tau"] = cfg.system.tau;
  switch (cfg.system.init.kind) {
    case InitKind::kTwoPoint:
      sys["init"]["kind"] = "two-point";
      break;
    case InitKind::kUniform:
      sys["init"]["kind"] = "uniform";
      break;
    case InitKind::kGaussian:
      sys["init"]["kind"] = "gaussian";
      break;
  }
  sys["init"]["param"] = cfg.system.init.param;
  sys["noise"] =
      cfg.system.noise == NoiseKind::kGaussian ? "gaussian" : "bounded";

  json rpg;
  if (cfg.rpg.eta1) rpg["eta1"] = *cfg.rpg.eta1;
  if (cfg.rpg.eta2) rpg["eta2"] = *cfg.rpg.eta2;
  rpg["epsilon"] = cfg.rpg.epsilon;
  rpg["max_iter"] = cfg.rpg.max_iter;
  rpg["recompute_steps"] = cfg.rpg.recompute_steps;

  json sbrpg;
  sbrpg["samples"] = cfg.sbrpg.samples;
  sbrpg["horizon"] = cfg.sbrpg.horizon;
  sbrpg["radius_k"] = cfg.sbrpg.radius_k;
  sbrpg["radius_sigma"] = cfg.sbrpg.radius_sigma;
  sbrpg["eta1"] = cfg.sbrpg.eta1;
  sbrpg["eta2"] = cfg.sbrpg.eta2;
  sbrpg["iterations"] = cfg.sbrpg.iterations;
  sbrpg["coefficient_mode"] =
      cfg.sbrpg.coefficient_mode == CoefficientMode::kAmbientDim
          ? "ambient-dim"
          : "literal";
  sbrpg["threads"] = cfg.sbrpg.threads;
  sbrpg["exact_cost"] = cfg.sbrpg.exact_cost;

  json root;
  root["system"] = std::move(sys);
  root["policy"]["k"] = vec_json(cfg.k0);
  root["policy"]["sigma"] = mat_json(cfg.sigma0);
  root["solver"]["are_tol"] = cfg.solver.are_tol;
  root["solver"]["max_iter"] = cfg.solver.max_iter;
  root["rpg"] = std::move(rpg);
  root["sbrpg"] = std::move(sbrpg);
  root["gradcheck"]["samples"] = cfg.gradcheck.samples;
  root["gradcheck"]["step"] = cfg.gradcheck.step;
  root["bounds"]["epsilon"] = cfg.bounds.epsilon;
  root["bounds"]["kappa"] = cfg.bounds.kappa;
  root["bounds"]["growth_constant"] = cfg.bounds.growth_constant;
  root["bounds"]["schedule"] = cfg.bounds.schedule;
  root["output"]["dir"] = cfg.output.dir;
  root["output"]["csv"] = cfg.output.csv;
  root["output"]["svg"] = cfg.output.svg;
  root["output"]["record_every"] = cfg.output.record_every;
  root["seed"] = cfg.seed;
  return root;
}

ExperimentConfig reference_experiment() {
  ExperimentConfig cfg;
  cfg.system.A = 0.7;
  cfg.system.B = RowVec(3);
  cfg.system.B << 0.1, 0.2, 0.3;
  cfg.system.C = 0.03;
  cfg.system.D = Mat(3, 3);
  cfg.system.D << 0.05, 0.13, 0.12,  //
      0.13, 0.07, 0.10,              //
      0.12, 0.10, 0.03;
  cfg.system.Q = 0.5;
  cfg.system.R = Mat::Identity(3, 3);
  cfg.system.gamma = 0.5;
  cfg.system.tau = 0.1;
  cfg.system.init = {InitKind::kTwoPoint, 1.0};
  cfg.system.noise = NoiseKind::kGaussian;

  cfg.k0 = Vec::Zero(3);
  cfg.sigma0 = 0.5 * Mat::Identity(3, 3);

  cfg.rpg.epsilon = 1e-6;
  cfg.rpg.max_iter = 20000;

  cfg.sbrpg.samples = 2000;
  cfg.sbrpg.horizon = 30;
  cfg.sbrpg.radius_k = 0.35;
  cfg.sbrpg.radius_sigma = 0.025;
  cfg.sbrpg.eta1 = 0.015;
  cfg.sbrpg.eta2 = 0.05;
  cfg.sbrpg.iterations = 300;

  cfg.seed = 1;
  cfg.sbrpg.seed = cfg.seed;
  return cfg;
}

}  // namespace erlq
