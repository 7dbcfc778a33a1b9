#include "weightlab/cli.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "weightlab/czd.hpp"
#include "weightlab/error.hpp"
#include "weightlab/operators.hpp"
#include "weightlab/spaces.hpp"
#include "weightlab/verify.hpp"
#include "weightlab/weights.hpp"

namespace weightlab {

namespace {

using json = nlohmann::ordered_json;

std::string full(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

json jnum(double x) { return std::isfinite(x) ? json(x) : json(full(x)); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double num(const std::string& what, const std::string& text) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParameterError(what + ": '" + text + "' is not a number");
}

// "name" or "name:item,item,..." where an item is key=value or a bare positional value.
// Only the first ':' separates the name, so a value may itself be a descriptor.
class Descriptor {
 public:
  explicit Descriptor(const std::string& text) : text_(text) {
    auto colon = text.find(':');
    name_ = text.substr(0, colon);
    if (name_.empty()) throw ParameterError("empty descriptor");
    if (colon == std::string::npos) return;
    rest_ = text.substr(colon + 1);
    for (const auto& item : split(rest_, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos)
        items_.emplace_back("", item);
      else
        items_.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
  }

  const std::string& name() const { return name_; }
  const std::string& rest() const { return rest_; }

  /// Declares the accepted keys in positional order; rejects unknown or surplus items.
  void expect(std::vector<std::string> keys) {
    keys_ = std::move(keys);
    std::size_t pos = 0;
    for (auto& [k, v] : items_) {
      if (k.empty()) {
        if (pos >= keys_.size()) throw ParameterError("'" + text_ + "': too many values");
        k = keys_[pos];
      } else if (std::find(keys_.begin(), keys_.end(), k) == keys_.end()) {
        throw ParameterError("'" + text_ + "': unknown key '" + k + "'");
      }
      ++pos;
    }
  }

  std::optional<std::string> text(const std::string& key) const {
    for (const auto& [k, v] : items_)
      if (k == key) return v;
    return std::nullopt;
  }
  double number(const std::string& key) const {
    auto t = text(key);
    if (!t) throw ParameterError("'" + text_ + "': missing " + key);
    return num(key, *t);
  }
  double number(const std::string& key, double fallback) const {
    auto t = text(key);
    return t ? num(key, *t) : fallback;
  }

 private:
  std::string text_, name_, rest_;
  std::vector<std::pair<std::string, std::string>> items_;
  std::vector<std::string> keys_;
};

Weight parse_weight(const std::string& text) {
  Descriptor d(text);
  const auto& k = d.name();
  if (k == "one") return d.expect({}), Weight::one();
  if (k == "table") {
    if (d.rest().empty()) throw ParameterError("weight 'table' takes a CSV path");
    std::string path = d.rest().rfind("path=", 0) == 0 ? d.rest().substr(5) : d.rest();
    return Weight::tabulated(load_csv(path));
  }
  if (k == "power" || k == "shifted") {
    const std::string e = k == "power" ? "beta" : "gamma";
    d.expect({e, "center", "center2"});
    Point c{d.number("center", 0.0), d.number("center2", 0.0)};
    return k == "power" ? Weight::power(d.number(e), c) : Weight::shifted(d.number(e), c);
  }
  throw ParameterError("unknown weight '" + k + "' (one, power:beta=b, shifted:gamma=g, table:path)");
}

NormSpec parse_norm(const std::string& text, const Weight& w_default, const Weight& w2_default) {
  Descriptor d(text);
  const auto& k = d.name();
  auto weight_of = [&](const char* key, const Weight& fallback) {
    auto t = d.text(key);
    return t ? parse_weight(*t) : fallback;
  };
  NormSpec spec;
  if (k == "bmo") {
    d.expect({"p"});
    if (d.text("p")) spec = norms::BMOp{d.number("p")};
    else spec = norms::BMO{};
    validate(spec);
    return spec;
  }
  if (k == "lebesgue") {
    d.expect({"p", "weight"});
    spec = norms::Lebesgue{d.number("p"), weight_of("weight", w_default)};
  } else if (k == "lorentz" || k == "weak-morrey" || k == "mpq") {
    d.expect({"p", "q", "weight"});
    Weight w = weight_of("weight", w_default);
    if (k == "lorentz") spec = norms::Lorentz{d.number("p"), d.number("q"), w};
    else if (k == "weak-morrey") spec = norms::WeakMorrey{d.number("p"), d.number("q"), w};
    else spec = morrey_pq(d.number("p"), d.number("q"), w);
  } else if (k == "two-weight-morrey") {
    d.expect({"q", "kappa", "weight", "weight2"});
    spec = norms::TwoWeightMorrey{d.number("q"), d.number("kappa"), weight_of("weight", w_default),
                                  weight_of("weight2", w2_default)};
  } else if (k == "morrey" || k == "local-morrey" || k == "inhom-morrey" || k == "central-morrey" ||
             k == "central-local-morrey") {
    d.expect({"q", "kappa", "weight"});
    double q = d.number("q"), kappa = d.number("kappa");
    Weight w = weight_of("weight", w_default);
    if (k == "morrey") spec = norms::WeightedMorrey{q, kappa, w};
    else if (k == "local-morrey") spec = norms::LocalMorrey{q, kappa};
    else if (k == "inhom-morrey") spec = norms::InhomMorrey{q, kappa, w};
    else if (k == "central-morrey") spec = norms::CentralMorrey{q, kappa, w};
    else spec = norms::CentralLocalMorrey{q, kappa, w};
  } else {
    throw ParameterError("unknown norm '" + k + "'");
  }
  validate(spec);
  return spec;
}

ClassSpec parse_class(const std::string& text) {
  Descriptor d(text);
  const auto& k = d.name();
  ClassSpec spec;
  if (k == "ap" || k == "ap1") {
    d.expect({"p"});
    if (k == "ap") spec = classes::Ap{d.number("p")};
    else spec = classes::Ap1{d.number("p")};
  } else if (k == "a1") {
    d.expect({});
    spec = classes::A1{};
  } else if (k == "apphi") {
    d.expect({"p", "a0"});
    spec = classes::ApPhi{d.number("p"), PhiSpec{d.number("a0", 1.0)}};
  } else if (k == "apdyadic" || k == "apdyadicphi") {
    d.expect({"p", "a0", "eta"});
    spec = classes::ApDyadicPhi{d.number("p"), PhiSpec{d.number("a0", 1.0)}, d.number("eta", 1.0)};
  } else if (k == "rh") {
    d.expect({"r"});
    spec = classes::RH{d.number("r")};
  } else if (k == "doubling") {
    d.expect({});
    spec = classes::Doubling{};
  } else {
    throw ParameterError("unknown weight class '" + k + "'");
  }
  validate(spec);
  return spec;
}

OperatorHandle parse_operator(const std::string& text, const Weight& w) {
  Descriptor d(text);
  if (d.name() == "maximal") {
    if (d.rest().empty()) throw ParameterError("maximal needs a variant: hl, phi, omega, dyadicphi");
    return parse_operator(d.rest(), w);
  }
  const auto& k = d.name();
  if (k == "identity") return d.expect({}), identity_operator();
  if (k == "hl") return d.expect({}), OperatorHandle::maximal(maximal_variants::HL{});
  if (k == "phi") {
    d.expect({"a0"});
    return OperatorHandle::maximal(maximal_variants::Phi{PhiSpec{d.number("a0", 1.0)}});
  }
  if (k == "dyadicphi" || k == "dyadic") {
    d.expect({"a0", "eta"});
    return OperatorHandle::maximal(maximal_variants::DyadicPhi{PhiSpec{d.number("a0", 1.0)}, d.number("eta", 1.0)});
  }
  if (k == "omega") {
    d.expect({"weight"});
    auto t = d.text("weight");
    return OperatorHandle::maximal(maximal_variants::Omega{t ? parse_weight(*t) : w});
  }
  if (k == "hilbert") {
    d.expect({"eps"});
    return OperatorHandle::truncated(KernelSpec::hilbert(), d.number("eps"));
  }
  if (k == "tstar") return d.expect({}), OperatorHandle::maximal_singular(KernelSpec::hilbert());
  if (k == "strong") {
    d.expect({"s", "lambda"});
    StrongKernelParams p{d.number("s", 1.0), d.number("lambda", 0.25), std::nullopt, std::nullopt};
    p.validate(1);
    return OperatorHandle::strong(p);
  }
  if (k == "choyang") {
    d.expect({"zeta", "s", "lambda", "k"});
    double kk = d.number("k");
    if (kk != std::floor(kk)) throw ParameterError("choyang: k must be an integer");
    StrongKernelParams p{d.number("s", 1.0), d.number("lambda", 0.25), d.number("zeta"), static_cast<int>(kk)};
    p.validate(1);
    return OperatorHandle::strong(p);
  }
  if (k == "pseudo") {
    d.expect({"symbol", "width"});
    std::string sym = d.text("symbol").value_or("mixed");
    if (sym == "identity") return OperatorHandle::pseudo(SymbolSpec::identity());
    if (sym == "mixed") return OperatorHandle::pseudo(SymbolSpec::mixed());
    if (sym == "bump") return OperatorHandle::pseudo(SymbolSpec::bump(d.number("width", 1.0)));
    throw ParameterError("unknown symbol '" + sym + "' (identity, mixed, bump)");
  }
  throw ParameterError("unknown operator '" + k + "'");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParameterError("cannot write '" + path + "'");
  return f;
}

struct GridArgs {
  int n = 1;
  int N = 256;
  double L = 4.0;
  Grid grid() const { return Grid(Box{n, {0.0, 0.0}, L}, N); }
};

// "n=1,N=256,L=4"
GridArgs parse_grid(const std::string& text) {
  GridArgs ga;
  if (text.empty()) return ga;
  Descriptor d("grid:" + text);
  d.expect({"n", "N", "L"});
  double n = d.number("n", 1), N = d.number("N", 256);
  if ((n != 1 && n != 2) || N != std::floor(N)) throw ParameterError("--grid needs n in {1,2} and an integer N");
  ga.n = static_cast<int>(n);
  ga.N = static_cast<int>(N);
  ga.L = d.number("L", 4.0);
  return ga;
}

int cmd_weight(std::ostream& out, const std::string& wtext, const std::string& ctext, const std::string& grid_text,
               int gmax, bool critical, const std::string& path) {
  Weight w = parse_weight(wtext);
  ClassSpec cls = parse_class(ctext);
  Grid g = parse_grid(grid_text).grid();
  std::ofstream file;
  if (!path.empty()) file = open_out(path);
  if (gmax < 0) gmax = std::min(8, g.finest_generation());
  auto rep = classify(w, cls, dyadic_family_ladder(g, gmax));
  json j;
  j["weight"] = rep.weight;
  j["class"] = rep.spec;
  j["families"] = rep.families;
  j["constants"] = json::array();
  for (double c : rep.constants) j["constants"].push_back(jnum(c));
  j["trend"] = to_string(rep.trend);
  if (critical) {
    auto ci = critical_index(w, g, gmax);
    const char* st = ci.status == CriticalIndex::Status::Bracketed ? "bracketed"
                     : ci.status == CriticalIndex::Status::Capped  ? "capped"
                                                                   : "not_a_infinity";
    j["critical_index"] = {{"status", st}, {"r_lo", jnum(ci.r_lo)}, {"r_hi", jnum(ci.r_hi)}};
  }
  (path.empty() ? out : file) << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_norm(std::ostream& out, const std::string& spec_text, const std::string& in, const std::string& wtext,
             const std::string& w2text, bool region) {
  NormSpec spec = parse_norm(spec_text, parse_weight(wtext), parse_weight(w2text));
  GridFunction f = load_csv(in);
  auto v = norm(f, spec);
  if (!region) {
    out << full(v.value) << "\n";
    return kExitOk;
  }
  json j;
  j["norm"] = describe(spec);
  j["value"] = jnum(v.value);
  j["region"] = v.region.describe(f.grid());
  j["window_limited"] = v.window_limited;
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_apply(std::ostream& out, const std::string& op_text, const std::string& wtext, const std::string& in,
              const std::string& path) {
  OperatorHandle op = parse_operator(op_text, parse_weight(wtext));
  GridFunction f = load_csv(in);
  std::ofstream file;
  if (!path.empty()) file = open_out(path);
  auto tf = op.apply(f);
  if (path.empty())
    write_csv(out, tf);
  else
    write_csv(file, tf);
  return kExitOk;
}

int cmd_czd(std::ostream& out, const std::vector<std::string>& ins, double r, double alpha, double a0, double eta,
            bool cert, const std::string& prefix) {
  VectorFunction v;
  v.r = r;
  for (const auto& p : ins) v.components.push_back(load_csv(p));
  v.validate();
  auto d = cz_decompose(v, alpha, PhiSpec{a0}, eta);
  json j;
  j["alpha"] = jnum(alpha);
  j["cubes"] = d.cubes.size();
  j["omega_cells"] = d.omega_cells();
  j["root_selected"] = d.root_selected;
  json cubes = json::array();
  for (const auto& s : d.cubes)
    cubes.push_back({{"g", s.cube.g},
                     {"k", {s.cube.k[0], s.cube.k[1]}},
                     {"tiling_generation", s.tiling_generation},
                     {"resolution_limited", s.resolution_limited},
                     {"average", jnum(s.average)}});
  j["selected"] = cubes;
  int code = kExitOk;
  if (cert) {
    auto c = certify(d);
    j["certificate"] = {{"passed", c.passed()},
                        {"disjoint_and_maximal", c.disjoint_and_maximal},
                        {"off_omega_bound", c.off_omega_bound},
                        {"lower_bound", c.lower_bound},
                        {"upper_bound_parent", c.upper_bound_parent},
                        {"upper_bound_stated", c.upper_bound_stated},
                        {"fbar_bound", c.fbar_bound},
                        {"domination", c.domination},
                        {"max_off_omega", jnum(c.max_off_omega)},
                        {"max_upper_parent_ratio", jnum(c.max_upper_parent_ratio)},
                        {"max_upper_stated_ratio", jnum(c.max_upper_stated_ratio)},
                        {"max_domination_ratio", jnum(c.max_domination_ratio)},
                        {"checked_cells", c.checked_cells},
                        {"witnesses", c.witnesses}};
    if (!c.passed()) code = kExitFlagged;
  }
  if (!prefix.empty())
    for (std::size_t k = 0; k < d.good.size(); ++k) {
      save_csv(prefix + ".good" + std::to_string(k) + ".csv", d.good[k]);
      save_csv(prefix + ".bad" + std::to_string(k) + ".csv", d.bad[k]);
      save_csv(prefix + ".fbar" + std::to_string(k) + ".csv", d.fbar[k]);
    }
  out << j.dump(2) << "\n";
  return code;
}

void print_summary(std::ostream& out, const ExperimentReport& r) {
  out << r.theorem << " direction=" << r.direction << " trend=" << to_string(r.trend) << "\n";
  for (const auto& s : r.series) {
    out << "  " << s.name << " [" << to_string(s.trend) << "]:";
    for (double x : s.suprema) out << " " << full(x);
    out << "\n";
  }
}

int cmd_probe(std::ostream& out, std::string theorem, const std::string& config, const std::vector<std::string>& sets,
              const std::string& json_path, const std::string& csv_path) {
  std::map<std::string, std::string> kv;
  if (!config.empty()) kv = read_flat_config(config);
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ParameterError("--set expects key=value, got '" + s + "'");
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (auto it = kv.find("theorem"); it != kv.end()) {
    if (!theorem.empty() && theorem != it->second)
      throw ParameterError("--theorem " + theorem + " disagrees with the config's theorem " + it->second);
    theorem = it->second;
    kv.erase(it);
  }
  if (theorem.empty()) throw ParameterError("probe needs --theorem or a theorem key in the config");
  auto spec = ExperimentSpec::make(theorem, kv);
  std::ofstream jf, cf;
  if (!json_path.empty()) jf = open_out(json_path);
  if (!csv_path.empty()) cf = open_out(csv_path);
  auto rep = boundedness_probe(spec);
  if (jf.is_open()) jf << to_json_text(rep);
  if (cf.is_open()) write_report_csv(cf, rep);
  print_summary(out, rep);
  return kExitOk;
}

int cmd_report(std::ostream& out, const std::string& in, const std::string& csv_path, bool as_json) {
  std::ifstream f(in);
  if (!f) throw ParameterError("cannot read '" + in + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  auto rep = report_from_json_text(ss.str());
  if (!csv_path.empty()) {
    auto cf = open_out(csv_path);
    write_report_csv(cf, rep);
  }
  if (as_json)
    out << to_json_text(rep);
  else
    print_summary(out, rep);
  return kExitOk;
}

}  // namespace

std::map<std::string, std::string> read_flat_config(const std::string& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParameterError("config: " + std::string(e.what()));
  }
  std::map<std::string, std::string> out;
  auto put = [&](const std::string& key, const std::string& value) {
    if (!out.emplace(key, value).second) throw ParameterError("config: key '" + key + "' appears more than once");
  };
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      put(name, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) put(key, leaf.data());
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"weightlab: weights, Morrey-type norms, operators and boundedness probes", "weightlab"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string grid_text;
  std::string wtext = "one", w2text = "one", ctext = "ap:2", spec_text, in, out_path, op_text, theorem, config,
              csv_path, prefix;
  int gmax = -1;
  bool critical = false, region = false, cert = false, as_json = false;
  double r = 2.0, alpha = 1.0, a0 = 1.0, eta = 1.0;
  std::vector<std::string> ins, sets;

  auto* weight = app.add_subcommand("weight", "classify a weight on a dyadic ladder");
  weight->add_option("--form,--weight,-w", wtext, "one | power:beta=b | shifted:gamma=g | table:path")->required();
  weight->add_option("--class,-c", ctext,
                     "ap:p=2 | a1 | ap1:p=2 | apphi:p=2,a0=1 | apdyadic:p=2,a0=1,eta=1 | rh:r=2 | doubling");
  weight->add_option("--grid", grid_text, "n=1,N=256,L=4");
  weight->add_option("--gmax", gmax, "finest dyadic generation of the ladder");
  weight->add_flag("--critical", critical, "also bracket the reverse Holder critical index");
  weight->add_option("--out,-o", out_path, "write the JSON report here instead of stdout");

  auto* normc = app.add_subcommand("norm", "evaluate a norm of a CSV grid function");
  normc->add_option("--spec,-s", spec_text,
                    "lebesgue:p=2 | lorentz:p=2,q=inf | mpq:p=2,q=1 | morrey:q=1,kappa=0.5 | weak-morrey:p=2,q=1 | "
                    "two-weight-morrey:q=1,kappa=0.5 | local-morrey:q,kappa | inhom-morrey:q,kappa | "
                    "central-morrey:q,kappa | central-local-morrey:q,kappa | bmo[:p=1]; any weighted norm takes "
                    "weight=<weight>")
      ->required();
  normc->add_option("--in,-i", in)->required();
  normc->add_option("--weight,-w", wtext);
  normc->add_option("--weight2", w2text, "second weight of two-weight-morrey");
  normc->add_flag("--region", region, "print JSON with the value and the attaining cube or ball");

  auto* apply = app.add_subcommand("apply", "apply an operator to a CSV grid function");
  apply->add_option("--op", op_text,
                    "maximal:hl | maximal:phi:a0=1 | maximal:omega | maximal:dyadicphi:a0=1,eta=1 | hilbert:eps=h | "
                    "tstar | strong:s=1,lambda=0.25 | choyang:zeta=1,s=1,lambda=0.25,k=2 | "
                    "pseudo:symbol=mixed|identity|bump,width=1 | identity")
      ->required();
  apply->add_option("--in,-i", in)->required();
  apply->add_option("--out,-o", out_path);
  apply->add_option("--weight,-w", wtext, "weight of the omega maximal operator");

  auto* czd = app.add_subcommand("czd", "Calderon-Zygmund decomposition of a vector function");
  czd->add_option("--in,-i", ins, "one CSV per component, comma separated or repeated")
      ->required()
      ->delimiter(',');
  czd->add_option("--r", r, "l^r exponent");
  czd->add_option("--alpha", alpha)->required();
  czd->add_option("--a0", a0, "phi(t) = (1+t)^a0");
  czd->add_option("--eta", eta);
  czd->add_flag("--certify", cert, "run the certificate; exit 3 when it fails");
  czd->add_option("--out-prefix", prefix, "write good/bad/fbar components as CSV");

  auto* probe = app.add_subcommand("probe", "run a boundedness probe");
  probe->add_option("--theorem,-t", theorem);
  probe->add_option("--config", config, "key=value file with optional [section] headers")->check(CLI::ExistingFile);
  probe->add_option("--set", sets, "key=value override, repeatable");
  probe->add_option("--out,-o", out_path, "JSON report");
  probe->add_option("--csv", csv_path, "CSV ratio table");

  auto* report = app.add_subcommand("report", "validate a JSON report, print a summary or re-emit");
  report->add_option("--in,-i", in)->required();
  report->add_option("--csv", csv_path);
  report->add_flag("--json", as_json, "re-emit the canonical JSON");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (*weight) return cmd_weight(out, wtext, ctext, grid_text, gmax, critical, out_path);
    if (*normc) return cmd_norm(out, spec_text, in, wtext, w2text, region);
    if (*apply) return cmd_apply(out, op_text, wtext, in, out_path);
    if (*czd) return cmd_czd(out, ins, r, alpha, a0, eta, cert, prefix);
    if (*probe) return cmd_probe(out, theorem, config, sets, out_path, csv_path);
    if (*report) return cmd_report(out, in, csv_path, as_json);
  } catch (const HypothesisError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnsupportedError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "failure: " << e.what() << "\n";
    return kExitFlagged;
  }
  return kExitConfig;
}

}  // namespace weightlab
