#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "paramshap/csvio.hpp"
#include "paramshap/distribution.hpp"
#include "paramshap/errors.hpp"
#include "paramshap/eval.hpp"
#include "paramshap/gallery.hpp"
#include "paramshap/hypergraph.hpp"
#include "paramshap/parser.hpp"
#include "paramshap/report.hpp"
#include "paramshap/shap.hpp"
#include "paramshap/similarity.hpp"
#include "paramshap/whynot.hpp"

namespace paramshap {

namespace {

struct QueryArgs {
  std::string query_file, query_text, schema, data_dir;
};

struct ScoreArgs {
  QueryArgs q;
  std::string dist_path, reference_csv, similarity = "jaccard", method = "auto";
  std::string bounds_csv, out_path;
  double epsilon = 0.05, delta = 0.05;
  uint64_t seed = 0;
  unsigned threads = 1;
  uint64_t budget_rows = kDefaultRowBudget;
  uint64_t support_budget = kDefaultSupportBudget;
  unsigned filter_arity_max = kDefaultFilterArity;
};

struct WhyNotArgs {
  QueryArgs q;
  std::string tuple_csv, utility = "size", method = "auto", out_path;
  bool tuple_given = false;
  unsigned threads = 1;
  uint64_t budget_rows = kDefaultRowBudget;
};

struct GenArgs {
  std::string kind, instance_path, out_dir;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

ParamQuery load_query(const QueryArgs& a) {
  const bool from_file = !a.query_file.empty();
  const bool from_text = !a.query_text.empty();
  if (from_file == from_text) {
    throw ValidationError("give the query as exactly one of --query FILE or --query-str TEXT");
  }
  return parse_query(from_file ? read_file(a.query_file) : a.query_text);
}

Database load_db(const QueryArgs& a) {
  if (a.schema.empty()) throw ValidationError("--schema is required for this command");
  std::vector<RelationSchema> schemas = load_schema(a.schema);
  if (a.data_dir.empty()) {
    Database db;
    for (auto& s : schemas) db.add_relation(Relation(s));
    return db;
  }
  return load_database(schemas, a.data_dir);
}

std::vector<std::string> split_csv_arg(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void add_query_options(CLI::App* cmd, QueryArgs& a, bool need_data) {
  cmd->add_option("--query", a.query_file, "file holding the query text");
  cmd->add_option("--query-str", a.query_text, "the query text itself");
  auto* schema = cmd->add_option("--schema", a.schema, "schema descriptor (JSON)");
  auto* data = cmd->add_option("--data", a.data_dir, "directory of per-relation CSV files");
  if (need_data) {
    schema->required();
    data->required();
  }
}

ShapTask build_task(const ScoreArgs& a) {
  ShapTask task;
  task.query = load_query(a.q);
  task.database = load_db(a.q);
  if (a.dist_path.empty()) throw ValidationError("--dist is required");
  task.dist = load_distribution(a.dist_path, task.query, task.database);
  task.reference = type_parameter_tuple(split_csv_arg(a.reference_csv), task.query,
                                        task.database, "reference");
  task.fn = SimilarityFn::parse(a.similarity);
  task.row_budget = a.budget_rows;
  task.support_budget = a.support_budget;
  task.filter_arity_max = a.filter_arity_max;
  task.validate();
  return task;
}

std::optional<std::pair<double, double>> parse_bounds(const std::string& csv) {
  if (csv.empty()) return std::nullopt;
  const auto parts = split_csv_arg(csv);
  if (parts.size() != 2) throw ValidationError("--bounds expects two values: lo,hi");
  try {
    const double lo = std::stod(parts[0]);
    const double hi = std::stod(parts[1]);
    if (!(lo < hi)) throw ValidationError("--bounds needs lo < hi");
    return std::make_pair(lo, hi);
  } catch (const std::invalid_argument&) {
    throw ValidationError("--bounds values must be numbers");
  } catch (const std::out_of_range&) {
    throw ValidationError("--bounds values are out of range");
  }
}

void echo_common(RunReport& r, const ScoreArgs& a) {
  if (!a.q.query_file.empty()) r.inputs["query"] = a.q.query_file;
  if (!a.q.query_text.empty()) r.inputs["query"] = a.q.query_text;
  r.inputs["schema"] = a.q.schema;
  r.inputs["data"] = a.q.data_dir;
  r.inputs["dist"] = a.dist_path;
  r.inputs["reference"] = a.reference_csv;
  r.inputs["similarity"] = a.similarity;
}

void warn_null_players(RunReport& r, const ParamQuery& q) {
  for (const auto& p : q.null_parameters()) {
    r.warnings.push_back("parameter $" + p +
                         " occurs in no atom and no filter; its score is 0 by definition");
  }
}

bool mc_bounds_available(const ShapTask& task, const std::string& bounds_csv) {
  return !bounds_csv.empty() || task.fn.bounds().has_value();
}

int cmd_shap(const ScoreArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  ShapTask task = build_task(a);
  RunReport r;
  r.command = "shap";
  echo_common(r, a);
  warn_null_players(r, task.query);
  r.names = task.query.parameters;

  std::string method = a.method;
  if (method == "brute") method = "bruteforce";
  if (method == "auto") {
    std::string reason;
    if (exact_eligible(task, &reason)) {
      method = "exact";
    } else {
      r.warnings.push_back("exact pipeline not applicable: " + reason);
      method = task.num_params() <= task.bruteforce_limit ? "bruteforce" : "mc";
    }
  }

  ShapResult res;
  if (method == "exact") {
    res = shap_exact(task, a.threads);
  } else if (method == "bruteforce") {
    try {
      res = shap_bruteforce_all(task);
    } catch (const BudgetError& e) {
      if (a.method != "auto" || !mc_bounds_available(task, a.bounds_csv)) throw;
      r.warnings.push_back(std::string("coalition table over budget (") + e.what() +
                           "); falling back to sampling");
      method = "mc";
    }
  }
  if (method == "mc") {
    res = shap_montecarlo_all(task, a.epsilon, a.delta, a.seed, parse_bounds(a.bounds_csv),
                              a.threads);
  }

  r.method = res.method;
  r.scores = res.scores;
  r.estimates = res.estimates;
  if (res.method != "mc") {
    r.has_utility_span = true;
    r.nu_full = res.nu_full;
    r.nu_empty = res.nu_empty;
  } else {
    r.has_mc_meta = true;
    r.epsilon = res.epsilon;
    r.delta = res.delta;
    r.samples_per_side = res.samples_per_side;
    r.seed = res.seed;
  }
  r.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit_report(r, a.out_path);
  return 0;
}

int cmd_esim(const ScoreArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  ShapTask task = build_task(a);
  RunReport r;
  r.command = "esim";
  r.method = "auto";
  echo_common(r, a);
  const Rational value = esim(task);
  r.facts["expected_similarity"] = value.to_string();
  std::ostringstream approx;
  approx << value.to_double();
  r.facts["expected_similarity_approx"] = approx.str();
  r.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit_report(r, a.out_path);
  return 0;
}

WhyNotInstance build_whynot(const WhyNotArgs& a) {
  ParamQuery q = load_query(a.q);
  Database db = load_db(a.q);
  if (!a.tuple_given) throw ValidationError("--tuple is required (may be empty for a "
                                            "0-column query)");
  const RelationSchema out_schema = output_schema(q, db);
  const auto raw = split_csv_arg(a.tuple_csv);
  if (raw.size() != out_schema.arity()) {
    throw ValidationError("--tuple has " + std::to_string(raw.size()) + " values but the "
                          "query outputs " + std::to_string(out_schema.arity()) + " columns");
  }
  std::vector<std::optional<Value>> pattern;
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == "_") {
      pattern.push_back(std::nullopt);
    } else {
      pattern.push_back(Value::parse_cell(raw[i], out_schema.columns[i].kind));
    }
  }
  auto [narrowed, tuple] = apply_tuple_pattern(q, pattern);
  WhyNotInstance inst;
  inst.query = std::move(narrowed);
  inst.database = std::move(db);
  inst.tuple = std::move(tuple);
  inst.row_budget = a.budget_rows;
  inst.validate();
  return inst;
}

int cmd_whynot(const WhyNotArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  WhyNotInstance inst = build_whynot(a);
  RunReport r;
  r.command = "whynot";
  if (!a.q.query_file.empty()) r.inputs["query"] = a.q.query_file;
  if (!a.q.query_text.empty()) r.inputs["query"] = a.q.query_text;
  r.inputs["schema"] = a.q.schema;
  r.inputs["data"] = a.q.data_dir;
  r.inputs["tuple"] = a.tuple_csv;
  r.inputs["utility"] = a.utility;
  for (size_t i = 0; i < inst.num_filters(); ++i) {
    r.names.push_back("f" + std::to_string(i + 1));
    r.facts["f" + std::to_string(i + 1)] = to_text(inst.query.filters[i]);
  }

  std::string method = a.method;
  if (a.utility == "qual") {
    if (method != "auto" && method != "brute") {
      throw ValidationError("the qualitative utility supports --method brute only");
    }
    r.method = "brute";
    r.scores = whynot_shapley_bruteforce(inst, WhyNotUtility::Qual);
  } else if (a.utility == "size") {
    if (method == "auto") {
      if (inst.query.atoms.size() == 1) {
        method = "closed";
      } else {
        bool acyclic_ok = true;
        for (const auto& f : inst.query.filters) {
          if (f.arity() + 1 > kDefaultFilterArity) acyclic_ok = false;
        }
        if (acyclic_ok) {
          try {
            acyclic_ok = is_p_acyclic(build_parameterized(inst).query);
          } catch (const ValidationError&) {
            acyclic_ok = false;
          }
        }
        method = acyclic_ok ? "acyclic" : "brute";
      }
    }
    r.method = method;
    if (method == "closed") {
      r.scores = whynot_size_closedform(inst);
    } else if (method == "acyclic") {
      r.scores = whynot_size_acyclic(inst, a.threads);
    } else if (method == "brute") {
      r.scores = whynot_shapley_bruteforce(inst, WhyNotUtility::Size);
    } else {
      throw ValidationError("unknown --method '" + method +
                            "' (expected auto, brute, closed, or acyclic)");
    }
  } else {
    throw ValidationError("unknown --utility '" + a.utility + "' (expected qual or size)");
  }

  r.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit_report(r, a.out_path);
  return 0;
}

struct CheckArgs {
  QueryArgs q;
  std::string out_path;
};

int cmd_check(const CheckArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  ParamQuery q = load_query(a.q);
  RunReport r;
  r.command = "check";
  r.method = "analyze";
  if (!a.q.query_file.empty()) r.inputs["query"] = a.q.query_file;
  if (!a.q.query_text.empty()) r.inputs["query"] = a.q.query_text;
  r.facts["query"] = to_text(q);
  r.facts["parameters"] = std::to_string(q.num_params());
  r.facts["full"] = q.is_full() ? "yes" : "no";
  r.facts["boolean"] = q.is_boolean() ? "yes" : "no";

  const GyoResult with_params = gyo_reduce(query_hypergraph(q, true));
  if (with_params.acyclic) {
    r.facts["p_acyclic"] = "yes";
  } else {
    std::string labels;
    for (const auto& l : with_params.remaining) {
      if (!labels.empty()) labels += ", ";
      labels += l;
    }
    r.facts["p_acyclic"] = "no (irreducible: " + labels + ")";
  }
  const GyoResult vars_only = gyo_reduce(query_hypergraph(q, false));
  r.facts["acyclic_ignoring_parameters"] = vars_only.acyclic ? "yes" : "no";

  if (!q.filters.empty()) {
    std::string arities;
    for (size_t i = 0; i < q.filters.size(); ++i) {
      if (!arities.empty()) arities += ", ";
      arities += "f" + std::to_string(i + 1) + ":" + std::to_string(q.filters[i].arity());
    }
    r.facts["filter_arities"] = arities;
  }
  const auto nulls = q.null_parameters();
  if (!nulls.empty()) {
    std::string names;
    for (const auto& n : nulls) {
      if (!names.empty()) names += ", ";
      names += "$" + n;
    }
    r.facts["null_parameters"] = names;
  }
  if (!a.q.schema.empty()) {
    try {
      Database db = load_db(a.q);
      validate_against(q, db);
      r.facts["schema_check"] = "ok";
    } catch (const ValidationError& e) {
      r.facts["schema_check"] = e.what();
    }
  }
  r.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit_report(r, a.out_path);
  return 0;
}

nlohmann::json value_to_json(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Integer: {
      const BigInt& n = v.as_integer();
      if (n.fits_slong_p()) return n.get_si();
      return v.to_string();
    }
    case ValueKind::Rational:
      return v.as_rational().to_string();
    case ValueKind::Boolean:
      return v.as_boolean();
    case ValueKind::String:
      return v.as_string();
  }
  throw InternalError("unreachable value kind");
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write '" + path.string() + "'");
  f << content;
}

void write_dist_json(const std::filesystem::path& path, const ParamQuery& q,
                     const Distribution& dist) {
  nlohmann::json root;
  root["type"] = "factorized";
  nlohmann::json params = nlohmann::json::object();
  for (size_t j = 0; j < q.parameters.size(); ++j) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : dist.marginals()[j]) {
      nlohmann::json entry;
      entry["value"] = value_to_json(e.value);
      entry["prob"] = e.prob.to_string();
      list.push_back(std::move(entry));
    }
    params[q.parameters[j]] = std::move(list);
  }
  root["params"] = std::move(params);
  write_text_file(path, root.dump(2) + "\n");
}

std::string tuple_csv_text(const Tuple& t) {
  std::string out;
  for (size_t i = 0; i < t.size(); ++i) {
    if (i) out += ",";
    out += t[i].to_string();
  }
  return out;
}

int cmd_gen(const GenArgs& a) {
  if (a.kind.empty() || a.instance_path.empty() || a.out_dir.empty()) {
    throw ValidationError("gen needs --kind, --instance, and --out-dir");
  }
  nlohmann::json desc;
  try {
    desc = nlohmann::json::parse(read_file(a.instance_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("--instance is not valid JSON: ") + e.what());
  }
  const std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);

  nlohmann::json meta;
  meta["kind"] = a.kind;

  if (a.kind == "dnf" || a.kind == "ineq") {
    if (!desc.contains("num_vars") || !desc.contains("disjuncts")) {
      throw ValidationError("--instance for this kind needs \"num_vars\" and \"disjuncts\"");
    }
    PosDnf phi;
    phi.num_vars = desc["num_vars"].get<size_t>();
    for (const auto& d : desc["disjuncts"]) {
      phi.disjuncts.push_back(d.get<std::vector<size_t>>());
    }
    ShapTask task = a.kind == "dnf" ? gen_dnf_instance(phi) : gen_ineq_instance(phi);

    write_text_file(dir / "query.txt", to_text(task.query) + "\n");
    std::vector<RelationSchema> schemas;
    for (const auto& [name, rel] : task.database.relations()) {
      (void)name;
      schemas.push_back(rel.schema());
    }
    write_schema(schemas, (dir / "schema.json").string());
    write_database(task.database, (dir / "data").string());
    write_dist_json(dir / "dist.json", task.query, task.dist);
    write_text_file(dir / "reference.txt", tuple_csv_text(task.reference) + "\n");
    meta["similarity"] = task.fn.name();
    meta["reference"] = tuple_csv_text(task.reference);
    meta["model_count"] = dnf_count_satisfying(phi).get_str();
  } else if (a.kind == "setcover") {
    if (!desc.contains("elements") || !desc.contains("sets")) {
      throw ValidationError("--instance for setcover needs \"elements\" and \"sets\"");
    }
    const size_t m = desc["elements"].get<size_t>();
    std::vector<std::vector<size_t>> sets;
    for (const auto& s : desc["sets"]) sets.push_back(s.get<std::vector<size_t>>());
    WhyNotInstance inst = gen_setcover_instance(m, sets);

    write_text_file(dir / "query.txt", to_text(inst.query) + "\n");
    std::vector<RelationSchema> schemas;
    for (const auto& [name, rel] : inst.database.relations()) {
      (void)name;
      schemas.push_back(rel.schema());
    }
    write_schema(schemas, (dir / "schema.json").string());
    write_database(inst.database, (dir / "data").string());
    write_text_file(dir / "tuple.txt", tuple_csv_text(inst.tuple) + "\n");
    meta["utility"] = "qual";
  } else {
    throw ValidationError("unknown --kind '" + a.kind +
                          "' (expected dnf, ineq, or setcover)");
  }
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");
  std::cout << "wrote " << a.kind << " instance to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"SHAP scores of query parameters and filter rankings for why-not questions"};
  app.require_subcommand(1);

  ScoreArgs shap_args, esim_args;
  WhyNotArgs whynot_args;
  CheckArgs check_args;
  GenArgs gen_args;

  auto add_score_options = [](CLI::App* cmd, ScoreArgs& a, bool with_method) {
    add_query_options(cmd, a.q, true);
    cmd->add_option("--dist", a.dist_path, "parameter distribution (JSON)")->required();
    cmd->add_option("--reference", a.reference_csv, "reference parameter tuple v1,v2,...")
        ->required();
    cmd->add_option("--similarity", a.similarity,
                    "jaccard | intersection | neg-sym-diff | neg-sym-cdiff | neg-diff | "
                    "min-diff:A:B | count");
    if (with_method) {
      cmd->add_option("--method", a.method, "auto | exact | brute | mc");
      cmd->add_option("--epsilon", a.epsilon, "additive error for mc");
      cmd->add_option("--delta", a.delta, "failure probability for mc");
      cmd->add_option("--seed", a.seed, "RNG seed for mc");
      cmd->add_option("--bounds", a.bounds_csv, "similarity value bounds lo,hi for mc");
    }
    cmd->add_option("--threads", a.threads, "worker threads");
    cmd->add_option("--out", a.out_path, "write a JSON report here instead of stdout");
    cmd->add_option("--budget-rows", a.budget_rows, "evaluation output-row budget");
    cmd->add_option("--budget-support", a.support_budget, "support enumeration budget");
    cmd->add_option("--filter-arity-max", a.filter_arity_max,
                    "largest filter arity accepted for materialization");
  };

  auto* shap_cmd = app.add_subcommand("shap", "score each query parameter");
  add_score_options(shap_cmd, shap_args, true);

  auto* esim_cmd = app.add_subcommand("esim", "expected similarity to the reference answer");
  add_score_options(esim_cmd, esim_args, false);

  auto* whynot_cmd = app.add_subcommand("whynot", "rank filters for an absent tuple");
  add_query_options(whynot_cmd, whynot_args.q, true);
  auto* tuple_opt =
      whynot_cmd->add_option("--tuple", whynot_args.tuple_csv,
                             "the absent tuple v1,v2,... (use _ for unspecified positions)");
  whynot_cmd->add_option("--utility", whynot_args.utility, "size | qual");
  whynot_cmd->add_option("--method", whynot_args.method, "auto | brute | closed | acyclic");
  whynot_cmd->add_option("--threads", whynot_args.threads, "worker threads");
  whynot_cmd->add_option("--out", whynot_args.out_path, "write a JSON report here");
  whynot_cmd->add_option("--budget-rows", whynot_args.budget_rows,
                         "evaluation output-row budget");

  auto* check_cmd = app.add_subcommand("check", "analyze a query's structure");
  add_query_options(check_cmd, check_args.q, false);
  check_cmd->add_option("--out", check_args.out_path, "write a JSON report here");

  auto* gen_cmd = app.add_subcommand("gen", "emit a generated hard instance");
  gen_cmd->add_option("--kind", gen_args.kind, "dnf | ineq | setcover")->required();
  gen_cmd->add_option("--instance", gen_args.instance_path, "instance description (JSON)")->required();
  gen_cmd->add_option("--out-dir", gen_args.out_dir, "directory to write into")->required();

  std::vector<const char*> argv;
  argv.push_back("paramshap");
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  whynot_args.tuple_given = tuple_opt->count() > 0;

  try {
    if (shap_cmd->parsed()) return cmd_shap(shap_args);
    if (esim_cmd->parsed()) return cmd_esim(esim_args);
    if (whynot_cmd->parsed()) return cmd_whynot(whynot_args);
    if (check_cmd->parsed()) return cmd_check(check_args);
    if (gen_cmd->parsed()) return cmd_gen(gen_args);
    throw ValidationError("no subcommand given");
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace paramshap
