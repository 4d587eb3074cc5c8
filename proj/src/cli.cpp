#include "govrt/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "govrt/cycle.hpp"
#include "govrt/serialize.hpp"
#include "govrt/sim.hpp"

namespace govrt {

namespace {

namespace fs = std::filesystem;

std::string emit(const Json& j) { return canonical_serialize(j) + "\n"; }

struct Options {
  std::string store = ".govrt";
  std::string policy_file;
};

std::optional<GovernancePolicy> policy_override(const Options& o) {
  if (o.policy_file.empty()) return std::nullopt;
  return load_policy(o.policy_file);
}

std::unique_ptr<Kernel> open_writer(const Options& o) {
  return Kernel::open(o.store, Store::Mode::read_write, policy_override(o));
}

// Readers never create or lock the store; a missing store reads as empty.
std::unique_ptr<Kernel> open_reader(const Options& o) {
  if (!fs::exists(o.store)) {
    return std::make_unique<Kernel>(policy_override(o).value_or(GovernancePolicy{}));
  }
  return Kernel::open(o.store, Store::Mode::read_only, policy_override(o));
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) fail(ErrorCode::StorageFailure, "cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::StorageFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string audit_log_text(const Kernel& k) {
  std::string out;
  for (const auto& e : k.events()) out += encode_line(e) + "\n";
  return out;
}

void write_run_files(const fs::path& dir, const Json& metrics, const std::string& csv, const Kernel& k) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::StorageFailure, "create " + dir.string() + ": " + ec.message());
  write_file(dir / "metrics.json", emit(metrics));
  if (!csv.empty()) write_file(dir / "metrics.csv", csv);
  write_file(dir / "audit.log", audit_log_text(k));
}

std::map<std::string, double> parse_metrics(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--metric", "expected name=value, got " + item);
    try {
      std::size_t used = 0;
      const double v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
      out[item.substr(0, eq)] = v;
    } catch (const std::exception&) {
      throw CLI::ValidationError("--metric", "not a number in " + item);
    }
  }
  return out;
}

template <NamedEnum E>
E parse_named(const std::string& flag, const std::string& text) {
  auto v = parse_enum<E>(text);
  if (!v) throw CLI::ValidationError(flag, "unknown value '" + text + "'");
  return *v;
}

std::string context_id_for(const KernelState& s, const std::string& name) {
  if (s.reg.contexts.count(name)) return name;
  for (const auto& [id, tag] : s.reg.contexts) {
    if (tag.tag == name) return id;
  }
  fail(ErrorCode::NotFound, "context " + name);
}

class Cli {
 public:
  Cli() : app_("Governed capability runtime", "govrt") {
    app_.set_help_all_flag("--help-all");
    app_.require_subcommand(1);
    app_.option_defaults()->always_capture_default();
    app_.add_option("--store", opt_.store, "store directory");
    app_.add_option("--policy", opt_.policy_file, "policy file overriding the store's policy for this invocation");
    capability();
    mutation();
    review();
    graph();
    audit();
    cycle();
    sim();
    state();
  }

  CommandResult run(std::vector<std::string> args) {
    std::reverse(args.begin(), args.end());
    try {
      app_.parse(args);
    } catch (const CLI::CallForHelp&) {
      return {0, app_.help(), ""};
    } catch (const CLI::CallForAllHelp&) {
      return {0, app_.help("", CLI::AppFormatMode::All), ""};
    } catch (const CLI::ParseError& e) {
      return {2, "", std::string("usage: ") + one_line(e.what())};
    }
    if (!action_) return {2, "", "usage: no command given"};
    try {
      return action_();
    } catch (const CLI::ParseError& e) {
      return {2, "", std::string("usage: ") + one_line(e.what())};
    } catch (const KernelError& e) {
      return {error_category(e.code()) == ErrorCategory::integrity ? 3 : 1, "", e.what()};
    } catch (const std::exception& e) {
      return {3, "", render_error(ErrorCode::StorageFailure, e.what())};
    }
  }

 private:
  using Action = std::function<CommandResult()>;

  static std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
  }

  static CommandResult ok(const Json& j) { return {0, emit(j), ""}; }

  CLI::App* group(const std::string& name, const std::string& help) {
    CLI::App* g = app_.add_subcommand(name, help);
    g->require_subcommand(1);
    return g;
  }

  void on(CLI::App* sub, Action a) {
    sub->callback([this, a = std::move(a)] { action_ = a; });
  }

  // ---- capability ----
  void capability() {
    CLI::App* g = group("capability", "capability registry and lifecycle");
    {
      auto* c = g->add_subcommand("register", "register an artifact as an experimental capability");
      auto* kind = slot<std::string>();
      auto* content = slot<std::string>();
      auto* content_file = slot<std::string>();
      auto* created_by = slot<std::string>();
      c->add_option("--kind", *kind, "artifact kind")->required();
      auto* inline_opt = c->add_option("--content", *content, "artifact content");
      auto* file_opt = c->add_option("--content-file", *content_file, "read content from a file");
      inline_opt->excludes(file_opt);
      c->add_option("--created-by", *created_by, "originating event id (default: the latest event)");
      on(c, [=, this] {
        const auto k = parse_named<CapabilityKind>("--kind", *kind);
        const std::string text = content_file->empty() ? *content : read_text(*content_file);
        auto kernel = open_writer(opt_);
        std::string origin = *created_by;
        if (origin.empty()) {
          const std::size_t n = kernel->event_count();
          if (n == 0) fail(ErrorCode::UnknownEvent, "the log is empty; pass --created-by or run a cycle first");
          origin = event_id(n - 1);
        }
        const CapabilityRecord rec = kernel->transact("operator", [&](CommandContext& ctx) {
          CapabilityRecord r = ops::register_capability(ctx, text, k, origin);
          ops::add_node(ctx, r.capability_id, node_kind_for(k));
          return r;
        });
        return ok(rec);
      });
    }
    {
      auto* c = g->add_subcommand("show", "show any registry record by id");
      auto* id = slot<std::string>();
      c->add_option("id", *id)->required();
      on(c, [=, this] { return ok(resolve(*open_reader(opt_)->snapshot(), *id)); });
    }
    {
      auto* c = g->add_subcommand("transition", "move a capability along its lifecycle");
      auto* id = slot<std::string>();
      auto* to = slot<std::string>();
      auto* evidence = slot<std::vector<std::string>>();
      auto* review = slot<std::string>();
      c->add_option("id", *id)->required();
      c->add_option("--to", *to, "target state")->required();
      c->add_option("--evidence", *evidence, "evaluation event ids (default: the record's evidence)");
      c->add_option("--review", *review, "approving review id");
      on(c, [=, this] {
        const auto target = parse_named<LifecycleState>("--to", *to);
        std::optional<std::string> r;
        if (!review->empty()) r = *review;
        return ok(open_writer(opt_)->transition(*id, target, *evidence, r));
      });
    }
    {
      auto* c = g->add_subcommand("evaluate", "record an evaluator's result for a capability, config or mutation");
      auto* id = slot<std::string>();
      auto* evaluator = slot<std::string>();
      auto* metrics = slot<std::vector<std::string>>();
      auto* quality = slot<std::vector<double>>();
      c->add_option("id", *id)->required();
      c->add_option("--evaluator", *evaluator, "evaluator or benchmark capability id")->required();
      c->add_option("--metric", *metrics, "name=value");
      c->add_option("--quality", *quality, "p r s u rho")->expected(5);
      on(c, [=, this] {
        std::optional<QualityComponents> q;
        if (!quality->empty()) q = QualityComponents{(*quality)[0], (*quality)[1], (*quality)[2], (*quality)[3], (*quality)[4]};
        auto kernel = open_writer(opt_);
        const Evaluation ev = kernel->transact("operator", [&](CommandContext& ctx) {
          Evaluation e = ops::record_evaluation(ctx, *id, *evaluator, parse_metrics(*metrics), q);
          const auto& g = ctx.state().graph;
          const GraphNode* s = g.find(*id);
          const GraphNode* d = g.find(*evaluator);
          if (s && d && kind_allowed(Relation::validated_by, s->kind, d->kind) &&
              !g.has_edge(*id, Relation::validated_by, *evaluator)) {
            ops::add_edge(ctx, *id, Relation::validated_by, *evaluator);
          }
          return e;
        });
        return ok(ev);
      });
    }
  }

  // ---- mutation ----
  void mutation() {
    CLI::App* g = group("mutation", "harness mutations");
    {
      auto* c = g->add_subcommand("propose", "propose a mutation from a file holding {base, contract, delta}");
      auto* file = slot<std::string>();
      c->add_option("file", *file, "JSON or TOML proposal")->required();
      on(c, [=, this] {
        const Json j = load_structured_file(*file);
        auto kernel = open_writer(opt_);
        std::string base = get_field_or<std::string>(j, "base", "");
        if (base.empty()) base = kernel->snapshot()->harness.active_config;
        return ok(kernel->propose(base, get_field<ChangeContract>(j, "contract"), get_field<ComponentDelta>(j, "delta")));
      });
    }
    {
      auto* c = g->add_subcommand("stage", "stage a proposed mutation against its validation evaluation");
      auto* id = slot<std::string>();
      auto* validation = slot<std::string>();
      c->add_option("id", *id)->required();
      c->add_option("--validation", *validation, "evaluation event id from the falsifying evaluator")->required();
      on(c, [=, this] { return ok(open_writer(opt_)->stage(*id, *validation)); });
    }
    {
      auto* c = g->add_subcommand("apply", "apply a staged, approved mutation");
      auto* id = slot<std::string>();
      c->add_option("id", *id)->required();
      on(c, [=, this] { return ok(open_writer(opt_)->apply(*id)); });
    }
    {
      auto* c = g->add_subcommand("rollback", "roll back an applied mutation");
      auto* id = slot<std::string>();
      auto* metric = slot<std::string>();
      auto* value = slot<double>(0.0);
      auto* by_operator = slot<bool>(false);
      c->add_option("id", *id)->required();
      auto* m = c->add_option("--metric", *metric, "observed metric");
      auto* v = c->add_option("--value", *value, "observed value");
      auto* o = c->add_flag("--operator", *by_operator, "explicit operator order");
      m->needs(v);
      v->needs(m);
      o->excludes(m);
      on(c, [=, this] {
        if (!*by_operator && metric->empty()) throw CLI::ValidationError("rollback", "give --metric/--value or --operator");
        return ok(open_writer(opt_)->rollback(*id, {*metric, *value, *by_operator}));
      });
    }
    {
      auto* c = g->add_subcommand("show", "show a mutation record");
      auto* id = slot<std::string>();
      c->add_option("id", *id)->required();
      on(c, [=, this] {
        const auto s = open_reader(opt_)->snapshot();
        const MutationRecord* m = find_mutation(*s, *id);
        if (!m) fail(ErrorCode::NotFound, "mutation " + *id);
        return ok(*m);
      });
    }
  }

  // ---- review ----
  void review() {
    CLI::App* g = group("review", "human review decisions");
    auto* c = g->add_subcommand("submit", "submit a review; the gate decides approve/reject/defer");
    auto* subject = slot<std::string>();
    auto* reviewer = slot<std::string>();
    auto* rationale = slot<std::string>();
    auto* evidence = slot<std::vector<std::string>>();
    auto* risk = slot<double>(0.0);
    c->add_option("subject", *subject)->required();
    c->add_option("--reviewer", *reviewer)->required();
    c->add_option("--risk", *risk, "risk assessment in [0, 1]")->required();
    c->add_option("--evidence", *evidence, "evidence event ids");
    c->add_option("--rationale", *rationale);
    on(c, [=, this] { return ok(open_writer(opt_)->review(*subject, *evidence, *risk, *reviewer, *rationale)); });
  }

  // ---- graph ----
  void graph() {
    CLI::App* g = group("graph", "runtime graph queries");
    {
      auto* c = g->add_subcommand("lineage", "ancestry and annotations of a node");
      auto* id = slot<std::string>();
      c->add_option("id", *id)->required();
      on(c, [=, this] { return ok(open_reader(opt_)->snapshot()->graph.lineage(*id)); });
    }
    {
      auto* c = g->add_subcommand("compose", "best feasible skill composition");
      auto* skills = slot<std::vector<std::string>>();
      auto* contexts = slot<std::vector<std::string>>();
      c->add_option("--skill", *skills, "candidate skill (default: every skill node)");
      c->add_option("--context", *contexts, "deployment context tag or id");
      on(c, [=, this] {
        auto kernel = open_reader(opt_);
        const auto s = kernel->snapshot();
        std::vector<std::string> ids = *skills;
        if (ids.empty()) {
          for (const auto& [id, n] : s->graph.nodes()) {
            if (n.kind == NodeKind::skill) ids.push_back(id);
          }
        }
        std::set<std::string> ctx;
        for (const auto& name : *contexts) ctx.insert(context_id_for(*s, name));
        const QualityLookup lookup = [&](const std::string& id) -> std::optional<QualityComponents> {
          if (const CapabilityRecord* cap = find_capability(*s, id)) return cap->quality;
          return std::nullopt;
        };
        return ok(compose(s->graph, ids, ctx, kernel->policy().quality_weights, lookup));
      });
    }
    {
      auto* c = g->add_subcommand("verify", "structural invariant scan");
      on(c, [=, this] {
        const auto problems = open_reader(opt_)->snapshot()->graph.verify();
        if (!problems.empty()) {
          return CommandResult{3, emit(Json{{"ok", false}, {"problems", problems}}),
                               render_error(ErrorCode::ChainBroken, "graph: " + problems.front())};
        }
        return ok(Json{{"ok", true}, {"problems", Json::array()}});
      });
    }
  }

  // ---- audit ----
  void audit() {
    CLI::App* g = group("audit", "audit log integrity");
    {
      auto* c = g->add_subcommand("verify", "check the hash chain line by line");
      on(c, [=, this] {
        if (!fs::exists(opt_.store)) return ok(audit_verify_lines({}));
        const Store store(opt_.store, Store::Mode::read_only);
        const auto lines = store.read_lines();
        const AuditReport report = audit_verify_lines(lines);
        if (report.violations.empty()) return ok(report);
        std::string out = emit(report);
        for (const auto& v : report.violations) out += "violation at event " + std::to_string(v.index) + ": " + v.reason + "\n";
        const auto& first = report.violations.front();
        return CommandResult{3, out,
                             render_error(ErrorCode::ChainBroken, std::to_string(report.violations.size()) +
                                                                      " violation(s), first at event " +
                                                                      std::to_string(first.index) + ": " + first.reason)};
      });
    }
    {
      auto* c = g->add_subcommand("replay", "rebuild state from the log and compare with the live state");
      on(c, [=, this] {
        auto kernel = open_reader(opt_);
        const AuditReport report = audit_verify(*kernel);
        const KernelState replayed = replay(kernel->events());
        Json out{{"audit", report}, {"state_digest", to_hex(sha256(canonical_serialize(state_to_json(replayed))))}};
        if (!report.ok()) {
          return CommandResult{3, emit(out), render_error(ErrorCode::ChainBroken, "replay does not match the live state")};
        }
        return ok(out);
      });
    }
  }

  // ---- cycle ----
  void cycle() {
    CLI::App* g = app_.add_subcommand("cycle", "governed evolution loop");
    g->require_subcommand(1);
    auto* c = g->add_subcommand("run", "run one governance cycle");
    auto* workload = slot<std::string>();
    c->add_option("--workload", *workload, "JSON or TOML workload (default: empty)");
    on(c, [=, this] {
      const Workload w = workload->empty() ? Workload{} : load_workload(*workload);
      return ok(run_cycle(*open_writer(opt_), w));
    });
  }

  // ---- sim ----
  void sim() {
    CLI::App* g = group("sim", "deterministic simulations");
    {
      auto* c = g->add_subcommand("run", "run a scenario config");
      auto* config = slot<std::string>();
      auto* out = slot<std::string>();
      c->add_option("config", *config, "scenario config (JSON or TOML)")->required();
      c->add_option("--out", *out, "directory for metrics.json, metrics.csv and audit.log");
      on(c, [=, this] {
        SimulationConfig cfg = load_simulation_config(*config);
        if (!opt_.policy_file.empty()) cfg.policy = load_policy(opt_.policy_file);
        Kernel kernel(cfg.policy);
        const SimulationMetrics m = run_scenario(cfg, kernel);
        if (!out->empty()) write_run_files(*out, m, metrics_csv(m), kernel);
        return ok(m);
      });
    }
    {
      auto* c = g->add_subcommand("normalizer", "the schema-normalizer scenario");
      auto* seed = slot<std::uint64_t>(1);
      auto* cycles = slot<std::uint64_t>(16);
      auto* variant = slot<std::string>("no_drift");
      auto* out = slot<std::string>();
      c->add_option("--seed", *seed);
      c->add_option("--cycles", *cycles);
      c->add_option("--variant", *variant, "no_drift | heavy_drift | drift_with_mutation");
      c->add_option("--out", *out, "directory for metrics.json, metrics.csv and audit.log");
      on(c, [=, this] {
        const auto v = parse_named<NormalizerVariant>("--variant", *variant);
        Kernel kernel(policy_override(opt_).value_or(GovernancePolicy{}));
        const NormalizerResult r = scenario_normalizer(*seed, *cycles, v, kernel);
        if (!out->empty()) write_run_files(*out, r, metrics_csv(r.metrics), kernel);
        return ok(r);
      });
    }
    {
      auto* c = g->add_subcommand("compare", "run configs differing only in policy side by side");
      auto* configs = slot<std::vector<std::string>>();
      auto* out = slot<std::string>();
      c->add_option("configs", *configs, "scenario configs")->required();
      c->add_option("--out", *out, "write the table to this file");
      on(c, [=, this] {
        std::vector<SimulationConfig> cfgs;
        for (const auto& f : *configs) cfgs.push_back(load_simulation_config(f));
        const Json table = compare_policies(cfgs);
        if (!out->empty()) write_file(*out, emit(table));
        return ok(table);
      });
    }
  }

  // ---- state ----
  void state() {
    CLI::App* g = group("state", "kernel state");
    auto* c = g->add_subcommand("show", "harness state summary and registry counts");
    on(c, [=, this] {
      auto kernel = open_reader(opt_);
      const auto s = kernel->snapshot();
      Json census = Json::object();
      for (LifecycleState st : kAllLifecycleStates) census[std::string(to_string(st))] = 0;
      for (const auto& [_, cap] : s->reg.capabilities) census[std::string(to_string(cap.lifecycle))] = census[std::string(to_string(cap.lifecycle))].get<int>() + 1;
      return ok(Json{{"harness", s->harness},
                     {"events", kernel->event_count()},
                     {"policy_digest", policy_digest(kernel->policy())},
                     {"capabilities", s->reg.capabilities.size()},
                     {"configs", s->reg.configs.size()},
                     {"mutations", s->reg.mutations.size()},
                     {"reviews", s->reg.reviews.size()},
                     {"lifecycle_census", census},
                     {"graph", Json{{"nodes", s->graph.nodes().size()}, {"edges", s->graph.edges().size()}}}});
    });
  }

  // Option targets must outlive the parse; the Cli owns them.
  template <typename T>
  T* slot(T init = T{}) {
    auto p = std::make_shared<T>(std::move(init));
    owned_.push_back(p);
    return p.get();
  }

  CLI::App app_;
  Options opt_;
  Action action_;
  std::vector<std::shared_ptr<void>> owned_;
};

}  // namespace

CommandResult dispatch(const std::vector<std::string>& args) {
  Cli cli;
  return cli.run(args);
}

}  // namespace govrt
