#include "hsdm/problem.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hsdm {

using Json = nlohmann::ordered_json;

namespace {

Point to_point(const Json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array");
  Point p;
  for (const auto& v : j) p.push_back(v.get<double>());
  return p;
}

std::vector<Point> to_matrix(const Json& j, const char* what) {
  std::vector<Point> rows;
  for (const auto& r : j) rows.push_back(to_point(r, what));
  return rows;
}

OperatorPtr parse_operator(const Json& j,
                           const std::map<std::string, OperatorPtr>& named) {
  if (j.is_string()) {
    auto it = named.find(j.get<std::string>());
    if (it == named.end())
      throw std::invalid_argument("operator reference does not resolve: " +
                                  j.get<std::string>());
    return it->second;
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "project_ball")
    return make_project_ball(to_point(j.at("center"), "center"), j.at("radius").get<double>());
  if (kind == "project_box")
    return make_project_box(to_point(j.at("lo"), "lo"), to_point(j.at("hi"), "hi"));
  if (kind == "project_halfspace")
    return make_project_halfspace(to_point(j.at("normal"), "normal"),
                                  j.at("offset").get<double>());
  if (kind == "project_affine")
    return make_project_affine(to_matrix(j.at("basis"), "basis"),
                               to_point(j.at("shift"), "shift"));
  if (kind == "compose") {
    std::vector<OperatorPtr> kids;
    for (const auto& c : j.at("children")) kids.push_back(parse_operator(c, named));
    return make_compose(std::move(kids));
  }
  if (kind == "convex_combine")
    return make_convex_combine(j.at("weight").get<double>(),
                               parse_operator(j.at("left"), named),
                               parse_operator(j.at("right"), named));
  if (kind == "affine_map") {
    LipschitzClass cl{false, 1.0};
    if (j.contains("tau")) cl = {true, j.at("tau").get<double>()};
    return make_affine_map(to_matrix(j.at("matrix"), "matrix"),
                           to_point(j.at("shift"), "shift"), cl);
  }
  if (kind == "constant") return make_constant(to_point(j.at("value"), "value"));
  throw std::invalid_argument("unknown operator kind: " + kind);
}

Json serialize_operator(const OperatorPtr& op);

Json serialize_operator(const Operator& op) {
  Json j;
  switch (op.kind) {
    case OpKind::ProjectBall:
      j["kind"] = "project_ball";
      j["center"] = op.center;
      j["radius"] = op.radius;
      break;
    case OpKind::ProjectBox:
      j["kind"] = "project_box";
      j["lo"] = op.lo;
      j["hi"] = op.hi;
      break;
    case OpKind::ProjectHalfspace:
      j["kind"] = "project_halfspace";
      j["normal"] = op.normal;
      j["offset"] = op.offset;
      break;
    case OpKind::ProjectAffine:
      j["kind"] = "project_affine";
      j["basis"] = op.basis;
      j["shift"] = op.shift;
      break;
    case OpKind::Compose: {
      j["kind"] = "compose";
      Json kids = Json::array();
      for (const auto& c : op.children) kids.push_back(serialize_operator(c));
      j["children"] = std::move(kids);
      break;
    }
    case OpKind::ConvexCombine:
      j["kind"] = "convex_combine";
      j["weight"] = op.weight;
      j["left"] = serialize_operator(op.left);
      j["right"] = serialize_operator(op.right);
      break;
    case OpKind::AffineMap:
      j["kind"] = "affine_map";
      j["matrix"] = op.matrix;
      j["shift"] = op.shift;
      if (op.claimed.is_contraction) j["tau"] = op.claimed.tau;
      break;
    case OpKind::ConstantMap:
      j["kind"] = "constant";
      j["value"] = op.value;
      break;
  }
  return j;
}

Json serialize_operator(const OperatorPtr& op) { return serialize_operator(*op); }

}  // namespace

double ProblemSpec::tau() const {
  if (tau_direct) return *tau_direct;
  if (F) return contraction_factor(F->kappa, F->eta, mu);
  if (g_operator) {
    const auto& op = operators.at(*g_operator);
    if (op->claimed.is_contraction) return op->claimed.tau;
  }
  throw std::runtime_error("spec does not determine a contraction factor");
}

OperatorPtr ProblemSpec::contraction() const {
  if (g_operator) return operators.at(*g_operator);
  if (F) return contraction_from_monotone(*F, mu);
  throw std::runtime_error("spec defines no contraction G");
}

std::vector<OperatorPtr> ProblemSpec::iteration_ops() const {
  std::vector<OperatorPtr> out;
  for (const auto& name : cycle) out.push_back(operators.at(name));
  return out;
}

ProblemSpec parse_problem(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("spec is not valid JSON: ") + e.what());
  }
  ProblemSpec s;
  s.name = j.value("name", "unnamed");
  s.dimension = j.at("dimension").get<std::size_t>();
  if (s.dimension == 0) throw std::invalid_argument("dimension must be positive");

  if (j.contains("operators"))
    for (const auto& [name, node] : j.at("operators").items())
      s.operators.emplace(name, parse_operator(node, s.operators));
  if (j.contains("cycle"))
    for (const auto& n : j.at("cycle")) {
      const auto name = n.get<std::string>();
      if (!s.operators.count(name))
        throw std::invalid_argument("cycle references unknown operator: " + name);
      s.cycle.push_back(name);
    }

  if (j.contains("monotone")) {
    const Json& m = j.at("monotone");
    if (m.contains("quadratic")) {
      const Json& q = m.at("quadratic");
      s.F = make_quadratic_gradient(q.at("q").get<double>(), to_point(q.at("a"), "a"));
    } else {
      s.F = make_monotone_affine(to_matrix(m.at("matrix"), "matrix"),
                                 to_point(m.at("shift"), "shift"),
                                 m.at("kappa").get<double>(), m.at("eta").get<double>());
    }
  }
  s.mu = j.value("mu", 1.0);
  if (s.F) {
    const double cap = 2.0 * s.F->eta / (s.F->kappa * s.F->kappa);
    if (!(s.mu > 0.0 && s.mu < cap)) {
      std::ostringstream os;
      os << "mu must lie in (0, 2 eta / kappa^2) = (0, " << cap << "), got " << s.mu;
      throw std::invalid_argument(os.str());
    }
  }
  if (j.contains("tau")) s.tau_direct = j.at("tau").get<double>();
  if (j.contains("g_operator")) {
    const auto name = j.at("g_operator").get<std::string>();
    if (!s.operators.count(name))
      throw std::invalid_argument("g_operator references unknown operator: " + name);
    s.g_operator = name;
  }

  if (j.contains("schedule")) {
    const Json& sc = j.at("schedule");
    s.schedule = make_power_schedule(
        sc.value("rho_num", 1L), sc.value("rho_den", 1L), sc.value("c_num", 1L),
        sc.value("c_den", 1L), sc.value("N_period", 1));
  }
  s.N = j.value("N", int(std::max<std::size_t>(s.cycle.size(), 1)));
  s.schedule.N_period = s.N;

  if (j.contains("witness")) s.witness = to_point(j.at("witness"), "witness");
  if (j.contains("start")) s.start = to_point(j.at("start"), "start");
  if (j.contains("known_solution"))
    s.known_solution = to_point(j.at("known_solution"), "known_solution");

  s.d = j.value("d", 1);
  if (s.d < 1) throw std::invalid_argument("d must be a positive integer");
  s.seed = j.value("seed", std::uint64_t(1));
  s.budget = j.value("budget", std::uint64_t(1'000'000));

  for (const Point* p : {&s.witness, &s.start}) {
    if (!p->empty() && p->size() != s.dimension)
      throw std::invalid_argument("point dimension mismatch");
  }
  return s;
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

std::string serialize_problem(const ProblemSpec& s) {
  Json j;
  j["name"] = s.name;
  j["dimension"] = s.dimension;
  Json ops = Json::object();
  for (const auto& [name, op] : s.operators) ops[name] = serialize_operator(op);
  j["operators"] = std::move(ops);
  j["cycle"] = s.cycle;
  if (s.F) {
    Json m;
    m["matrix"] = s.F->matrix;
    m["shift"] = s.F->shift;
    m["kappa"] = s.F->kappa;
    m["eta"] = s.F->eta;
    j["monotone"] = std::move(m);
  }
  j["mu"] = s.mu;
  if (s.tau_direct) j["tau"] = *s.tau_direct;
  if (s.g_operator) j["g_operator"] = *s.g_operator;
  Json sc;
  sc["rho_num"] = s.schedule.rho_num;
  sc["rho_den"] = s.schedule.rho_den;
  sc["c_num"] = s.schedule.c_num;
  sc["c_den"] = s.schedule.c_den;
  sc["N_period"] = s.schedule.N_period;
  j["schedule"] = std::move(sc);
  j["N"] = s.N;
  if (!s.witness.empty()) j["witness"] = s.witness;
  if (!s.start.empty()) j["start"] = s.start;
  if (s.known_solution) j["known_solution"] = *s.known_solution;
  j["d"] = s.d;
  j["seed"] = s.seed;
  j["budget"] = s.budget;
  return j.dump(2);
}

std::function<std::uint64_t(std::uint64_t)> parse_g(const std::string& text) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
  if (t.empty()) throw std::invalid_argument("empty g expression");

  if (t.rfind("max(", 0) == 0 && t.back() == ')') {
    const std::string inner = t.substr(4, t.size() - 5);
    int depth = 0;
    for (std::size_t i = 0; i < inner.size(); ++i) {
      if (inner[i] == '(') ++depth;
      if (inner[i] == ')') --depth;
      if (inner[i] == ',' && depth == 0) {
        auto a = parse_g(inner.substr(0, i));
        auto b = parse_g(inner.substr(i + 1));
        return [a, b](std::uint64_t n) { return std::max(a(n), b(n)); };
      }
    }
    throw std::invalid_argument("malformed max(...) in g expression");
  }
  if (t.rfind("table:", 0) == 0) {
    std::vector<std::uint64_t> vals;
    std::stringstream ss(t.substr(6));
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stoull(cell));
    if (vals.empty()) throw std::invalid_argument("empty g table");
    return [vals](std::uint64_t n) { return n < vals.size() ? vals[n] : vals.back(); };
  }
  if (auto star = t.find('*'); star != std::string::npos) {
    const std::string lhs = t.substr(0, star), rhs = t.substr(star + 1);
    const std::string num = lhs == "n" ? rhs : lhs;
    if ((lhs != "n" && rhs != "n") || num == "n")
      throw std::invalid_argument("g product must be c*n");
    const std::uint64_t c = std::stoull(num);
    return [c](std::uint64_t n) { return c * n; };
  }
  if (auto plus = t.find('+'); plus != std::string::npos) {
    const std::string lhs = t.substr(0, plus), rhs = t.substr(plus + 1);
    const std::string num = lhs == "n" ? rhs : lhs;
    if ((lhs != "n" && rhs != "n") || num == "n")
      throw std::invalid_argument("g sum must be n+c");
    const std::uint64_t c = std::stoull(num);
    return [c](std::uint64_t n) { return n + c; };
  }
  if (t == "n") return [](std::uint64_t n) { return n; };
  const std::uint64_t c = std::stoull(t);
  return [c](std::uint64_t) { return c; };
}

}  // namespace hsdm
