#include "kontext/cli.hpp"

#include "kontext/bench.hpp"
#include "kontext/context.hpp"
#include "kontext/layerstate.hpp"
#include "kontext/process.hpp"
#include "kontext/scan.hpp"
#include "kontext/shim.hpp"
#include "kontext/specfile.hpp"
#include "kontext/trace.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>

#include <unistd.h>

namespace fs = std::filesystem;

namespace kontext::cli {

namespace {

struct Globals {
  std::string spec;
  std::string state;
  bool verbose = false;
  bool porcelain = false;

  std::optional<std::string> spec_path() const {
    if (!spec.empty())
      return spec;
    if (const char* env = std::getenv(std::string(shim::kEnvSpec).c_str()); env && *env)
      return std::string(env);
    return std::nullopt;
  }

  std::string state_path() const {
    if (!state.empty())
      return state;
    if (const char* env = std::getenv(std::string(shim::kEnvState).c_str()); env && *env)
      return env;
    return default_state_path();
  }
};

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Aligned plain-text columns.
class Table {
public:
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void print(std::ostream& out) const {
    std::vector<std::size_t> widths;
    for (const auto& row : rows_) {
      widths.resize(std::max(widths.size(), row.size()));
      for (std::size_t i = 0; i < row.size(); ++i)
        widths[i] = std::max(widths[i], row[i].size());
    }
    for (const auto& row : rows_) {
      std::string line;
      for (std::size_t i = 0; i < row.size(); ++i) {
        line += row[i];
        if (i + 1 < row.size())
          line += std::string(widths[i] - row[i].size() + 2, ' ');
      }
      out << line << '\n';
    }
  }

private:
  std::vector<std::vector<std::string>> rows_;
};

std::string absolute(const std::string& path) { return fs::absolute(path).lexically_normal().string(); }

std::string require_spec(const Globals& g) {
  auto path = g.spec_path();
  if (!path)
    throw UsageError("no spec given (use --spec or set KONTEXT_SPEC)");
  return *path;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomically(const std::string& path, const std::string& content) {
  const auto temp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out)
      throw std::runtime_error("cannot write '" + temp + "'");
  }
  std::error_code ec;
  fs::rename(temp, path, ec);
  if (ec) {
    fs::remove(temp);
    throw std::runtime_error("cannot replace '" + path + "': " + ec.message());
  }
}

// ---------------------------------------------------------------- spec-check

std::string regex_escape(std::string_view text) {
  static const std::string_view special = R"(\^$.|?*+()[]{})";
  std::string out;
  for (char c : text) {
    if (special.find(c) != std::string_view::npos)
      out += '\\';
    out += c;
  }
  return out;
}

int cmd_spec_check(const Globals& g, const std::string& positional, std::ostream& out,
                   std::ostream& err) {
  const auto path = positional.empty() ? require_spec(g) : positional;
  SpecDocument doc;
  try {
    doc = load_spec(path);
  } catch (const ParseError& e) {
    err << path << ":" << e.line() << ": error: " << to_string(e.kind()) << ": " << e.detail()
        << '\n';
    return kDataError;
  }

  for (const auto& w : doc.warnings)
    err << path << ":" << w.line << ": warning: " << w.message << '\n';

  std::size_t errors = 0;
  std::size_t contextual = 0;
  std::set<std::string> patterns;

  auto line_of = [&](const KeyName& name, std::string_view prop) {
    const auto it = doc.meta_line_index.find({name, std::string(prop)});
    if (it != doc.meta_line_index.end())
      return it->second;
    const auto li = doc.line_index.find(name);
    return li == doc.line_index.end() ? std::size_t{0} : li->second;
  };

  for (const auto& key : doc.keyset) {
    const auto context = key.meta(kContextProperty);
    if (!context)
      continue;
    ++contextual;
    Template tmpl;
    try {
      tmpl = Template::parse(*context);
    } catch (const TemplateError& e) {
      std::string what = e.what();
      if (e.kind() == TemplateErrorKind::UnterminatedPlaceholder)
        what = "unterminated placeholder in '" + std::string(*context) + "'";
      err << path << ":" << line_of(key.name(), kContextProperty) << ": error: " << what << '\n';
      ++errors;
      continue;
    }

    // Keys with the template's shape are the pattern entries it can select.
    std::string pattern;
    for (const auto& part : tmpl.parts()) {
      if (const auto* lit = std::get_if<Template::Literal>(&part))
        pattern += regex_escape(lit->text);
      else
        pattern += "([^/]+)";
    }
    const std::regex shape(pattern);
    const auto refs = tmpl.layers();
    std::vector<bool> concrete(refs.size(), false);
    for (const auto& candidate : doc.keyset) {
      if (candidate.name() == key.name())
        continue;
      std::smatch m;
      if (!std::regex_match(candidate.name().str(), m, shape))
        continue;
      patterns.insert(candidate.name().str());
      for (std::size_t i = 0; i < refs.size(); ++i) {
        if (m[i + 1].str() != kWildcard)
          concrete[i] = true;
      }
    }
    for (std::size_t i = 0; i < refs.size(); ++i) {
      if (!concrete[i])
        err << path << ":" << line_of(key.name(), kContextProperty) << ": warning: layer '"
            << refs[i] << "' of '" << key.name().str() << "' has no concrete entries\n";
    }
  }

  for (const auto& key : doc.keyset) {
    if (!key.name().is_below(KeyName::parse(shim::kOpenRoot)))
      continue;
    const auto prefix = key.meta(shim::kTemplateProperty);
    if (!prefix)
      continue;
    try {
      if (doc.keyset.below(KeyName::parse(*prefix)).empty())
        err << path << ":" << line_of(key.name(), shim::kTemplateProperty)
            << ": warning: nothing below template prefix '" << *prefix << "'\n";
    } catch (const InvalidName& e) {
      err << path << ":" << line_of(key.name(), shim::kTemplateProperty) << ": error: " << e.what()
          << '\n';
      ++errors;
    }
  }

  if (g.porcelain) {
    out << "keys=" << doc.keyset.size() << "\tcontextual=" << contextual
        << "\tpatterns=" << patterns.size() << "\terrors=" << errors << '\n';
  } else {
    out << (errors ? "FAILED" : "OK") << ": " << doc.keyset.size() << " keys, " << contextual
        << " contextual, " << patterns.size() << " pattern entries";
    if (errors)
      out << ", " << errors << " errors";
    out << '\n';
  }
  return errors ? kDataError : kOk;
}

// ----------------------------------------------------------------------- get

int cmd_get(const Globals& g, const std::string& name_text, std::ostream& out, std::ostream& err) {
  const auto spec = load_spec(require_spec(g)).keyset;
  const auto ctx = state_read(g.state_path());
  const auto name = KeyName::parse(name_text);
  std::optional<LookupOutcome> outcome;
  try {
    outcome = contextual_lookup(spec, name, ctx);
  } catch (const LookupError& e) {
    err << "kontext: " << e.what() << '\n';
    return kDataError;
  }
  if (!outcome)
    return kNotFound;
  out << outcome->value << '\n';
  if (g.verbose) {
    out << "matched: " << outcome->matched_name.str() << '\n';
    out << "chain:";
    for (std::size_t i = 0; i < outcome->resolved_chain.size(); ++i)
      out << (i ? " -> " : " ") << outcome->resolved_chain[i].str();
    out << '\n';
  }
  return kOk;
}

// ----------------------------------------------------------------------- set

int cmd_set(const Globals& g, const std::string& name_text, const std::string& value,
            const std::vector<std::string>& meta, std::ostream& out) {
  const auto path = require_spec(g);
  KeySet keys;
  if (fs::exists(path))
    keys = load_spec(path).keyset;

  const auto name = KeyName::parse(name_text);
  Key key = keys.get(name) ? *keys.get(name) : Key(name);
  key.set_value(value);
  for (const auto& assignment : meta) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
      throw UsageError("--meta expects property=value, got '" + assignment + "'");
    key.set_meta(assignment.substr(0, eq), assignment.substr(eq + 1));
  }
  keys.insert(std::move(key));
  write_file_atomically(path, serialize_spec(keys));
  if (g.verbose)
    out << name.str() << " = " << value << '\n';
  return kOk;
}

// --------------------------------------------------------------------- layer

std::vector<pid_t> parse_pids(const std::string& list) {
  std::vector<pid_t> pids;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty())
      continue;
    try {
      std::size_t used = 0;
      const long pid = std::stol(item, &used);
      if (used != item.size())
        throw std::invalid_argument(item);
      pids.push_back(static_cast<pid_t>(pid));
    } catch (const std::exception&) {
      throw UsageError("bad pid '" + item + "'");
    }
  }
  return pids;
}

int cmd_layer(const Globals& g, const std::string& action, const std::vector<std::string>& args,
              const std::string& notify_list, const std::string& signal, std::ostream& out,
              std::ostream& err) {
  const auto path = g.state_path();
  if (action == "list") {
    if (!args.empty())
      throw UsageError("layer list takes no arguments");
    const auto state = state_read(path);
    if (g.porcelain) {
      out << serialize_state(state);
    } else {
      out << "generation " << state.generation() << '\n';
      Table table;
      for (const auto& [name, value] : state.layers())
        table.add({name, value});
      table.print(out);
    }
    return kOk;
  }

  std::uint64_t generation;
  if (action == "set") {
    if (args.size() != 2)
      throw UsageError("usage: layer set NAME VALUE");
    generation = state_set_layer(path, args[0], args[1]);
  } else if (action == "unset") {
    if (args.size() != 1)
      throw UsageError("usage: layer unset NAME");
    generation = state_set_layer(path, args[0], std::nullopt);
  } else {
    throw UsageError("unknown layer action '" + action + "' (expected set, unset or list)");
  }
  out << (g.porcelain ? "generation=" : "generation ") << generation << '\n';

  if (!notify_list.empty()) {
    for (const auto& r : notify(parse_pids(notify_list), signal)) {
      if (r.status != NotifyStatus::Sent || g.verbose)
        err << "notify " << r.pid << ": " << to_string(r.status) << '\n';
    }
  }
  return kOk;
}

// ---------------------------------------------------------------- run, trace

std::map<std::string, std::optional<std::string>> shim_environment(const Globals& g) {
  std::map<std::string, std::optional<std::string>> env;
  const auto shim = shim_library_path();
  const char* existing = std::getenv("LD_PRELOAD");
  env["LD_PRELOAD"] = existing && *existing ? shim + ":" + existing : shim;
  if (auto spec = g.spec_path())
    env[std::string(shim::kEnvSpec)] = absolute(*spec);
  else
    env[std::string(shim::kEnvSpec)] = std::nullopt;
  env[std::string(shim::kEnvState)] = absolute(g.state_path());
  return env;
}

int cmd_run(const Globals& g, const std::vector<std::string>& command, std::ostream& err) {
  if (command.empty())
    throw UsageError("run needs a program");
  LaunchSpec launch;
  launch.program = command.front();
  launch.args.assign(command.begin() + 1, command.end());
  launch.env = shim_environment(g);
  launch.env[std::string(shim::kEnvTrace)] = std::nullopt;
  try {
    return run_and_wait(launch);
  } catch (const ExecFailed& e) {
    err << "kontext: " << e.what() << '\n';
    return kExecFailed;
  }
}

int cmd_trace(const Globals& g, long startup_ms, const std::string& trace_out,
              const std::vector<std::string>& command, std::ostream& out, std::ostream& err) {
  if (command.empty())
    throw UsageError("trace needs a program");

  KeySet spec;
  if (auto spec_path = g.spec_path())
    spec = load_spec(*spec_path).keyset;

  std::string trace_path = trace_out;
  bool remove_after = false;
  if (trace_path.empty()) {
    const char* tmp = std::getenv("TMPDIR");
    std::string pattern = std::string(tmp && *tmp ? tmp : "/tmp") + "/kontext-trace-XXXXXX";
    const int fd = ::mkstemp(pattern.data());
    if (fd < 0)
      throw std::runtime_error("cannot create trace file");
    ::close(fd);
    trace_path = pattern;
    remove_after = true;
  } else {
    std::ofstream truncate(trace_path, std::ios::trunc);
  }

  LaunchSpec launch;
  launch.program = command.front();
  launch.args.assign(command.begin() + 1, command.end());
  launch.env = shim_environment(g);
  launch.env[std::string(shim::kEnvTrace)] = absolute(trace_path);
  launch.env[std::string(shim::kEnvStartupMs)] = std::to_string(startup_ms);

  const auto launch_ns = shim::monotonic_ns();
  int status;
  try {
    status = run_and_wait(launch);
  } catch (const ExecFailed& e) {
    err << "kontext: " << e.what() << '\n';
    if (remove_after)
      fs::remove(trace_path);
    return kExecFailed;
  }

  const auto text = read_file(trace_path);
  if (remove_after)
    fs::remove(trace_path);
  std::vector<trace::GetenvRecord> records;
  try {
    records = trace::parse_trace(text);
  } catch (const trace::UnparseableTrace& e) {
    err << "kontext: " << e.what() << '\n';
    return kDataError;
  }
  const auto report =
      trace::aggregate_trace(records, launch_ns, std::chrono::milliseconds(startup_ms), spec);

  if (g.porcelain) {
    out << "program=" << command.front() << "\tgetenv_all=" << report.total_calls
        << "\tall_uniq=" << report.unique_params << "\tlater_uniq=" << report.later_unique
        << "\tlater_config=" << report.config_candidates << "\texit=" << status << '\n';
  } else {
    Table table;
    table.add({"program", "getenv all", "all uniq", "later uniq", "later config"});
    table.add({fs::path(command.front()).filename().string(), std::to_string(report.total_calls),
               std::to_string(report.unique_params), std::to_string(report.later_unique),
               std::to_string(report.config_candidates)});
    table.print(out);
  }
  if (g.verbose) {
    for (const auto& name : report.later_names)
      out << "later: " << name << '\n';
    for (const auto& name : report.candidate_names)
      out << "candidate: " << name << '\n';
    out << "child exit status: " << status << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------- scan

int cmd_scan(const Globals& g, const std::string& root, const std::vector<std::string>& extensions,
             const std::string& word, std::ostream& out, std::ostream& err) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    err << "kontext: '" << root << "' is not a readable directory\n";
    return kDataError;
  }
  const auto report =
      scan::scan_tree(root, extensions.empty() ? scan::default_extensions() : extensions, word);
  for (const auto& e : report.errors)
    err << "skipped: " << e << '\n';

  using scan::OccurrenceKind;
  const auto& t = report.totals;
  const std::string per_call = t.lines_per_call ? std::to_string(*t.lines_per_call) : "-";
  auto relative = [&](const std::string& p) { return fs::path(p).lexically_relative(root).string(); };

  if (g.porcelain) {
    for (const auto& f : report.files) {
      out << "file\t" << relative(f.path) << '\t' << f.loc << '\t' << f.count(OccurrenceKind::Call)
          << '\t' << f.count(OccurrenceKind::CommentOrString) << '\t'
          << f.count(OccurrenceKind::Identifier) << '\n';
      if (g.verbose) {
        for (const auto& o : f.occurrences)
          out << "occurrence\t" << relative(f.path) << '\t' << o.line << '\t' << to_string(o.kind)
              << '\n';
      }
    }
    out << "total\t" << t.files << '\t' << t.loc << '\t' << t.calls << '\t' << t.comment_or_string
        << '\t' << t.identifiers << '\t' << per_call << '\n';
    return kOk;
  }

  Table table;
  table.add({"file", "loc", "calls", "comment/string", "identifier", "lines per call"});
  for (const auto& f : report.files) {
    const auto calls = f.count(OccurrenceKind::Call);
    table.add({relative(f.path), std::to_string(f.loc), std::to_string(calls),
               std::to_string(f.count(OccurrenceKind::CommentOrString)),
               std::to_string(f.count(OccurrenceKind::Identifier)),
               calls ? std::to_string((f.loc + calls / 2) / calls) : "-"});
  }
  table.add({"total (" + std::to_string(t.files) + " files)", std::to_string(t.loc),
             std::to_string(t.calls), std::to_string(t.comment_or_string),
             std::to_string(t.identifiers), per_call});
  table.print(out);
  if (g.verbose) {
    for (const auto& f : report.files) {
      for (const auto& o : f.occurrences)
        out << relative(f.path) << ":" << o.line << ": " << to_string(o.kind) << '\n';
    }
  }
  return kOk;
}

// --------------------------------------------------------------------- bench

int cmd_bench(const Globals& g, std::size_t iterations, const std::string& name,
              std::size_t changes, std::ostream& out) {
  bench::BenchOptions options;
  options.spec_path = require_spec(g);
  options.state_path = g.state_path();
  options.iterations = iterations;
  options.changes = changes;
  if (!name.empty())
    options.name = name;
  if (iterations < bench::kMinIterations)
    throw UsageError("--iterations must be at least " + std::to_string(bench::kMinIterations));

  const auto r = bench::run_bench(options);
  if (!g.porcelain) {
    auto fmt = [](double v) {
      std::ostringstream s;
      s.precision(1);
      s << std::fixed << v;
      return s.str();
    };
    out << "getenv(\"" << r.name << "\") " << (r.managed ? "managed" : "unmanaged") << ", "
        << r.iterations << " iterations\n";
    Table table;
    table.add({"path", "median ns/call", "reloads"});
    table.add({"libc getenv", fmt(r.baseline_ns_per_call), "-"});
    table.add({"shim, steady context", fmt(r.shimmed_ns_per_call), std::to_string(r.steady_reloads)});
    table.add({"shim, " + std::to_string(r.injected_changes) + " layer changes",
               fmt(r.changing_ns_per_call), std::to_string(r.reload_count)});
    table.print(out);
    std::ostringstream ratio;
    ratio.precision(2);
    ratio << std::fixed << r.overhead_ratio;
    out << "overhead ratio " << ratio.str() << "x\n";
  }
  out << bench::to_json(r) << '\n';
  return kOk;
}

}  // namespace

std::string shim_library_path() {
  if (const char* env = std::getenv("KONTEXT_SHIM"); env && *env)
    return env;
  std::error_code ec;
  const auto exe = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    const auto dir = exe.parent_path();
    for (const auto& candidate : {dir / "libkontext_shim.so", dir / ".." / "lib" / "libkontext_shim.so"}) {
      if (fs::exists(candidate, ec))
        return candidate.lexically_normal().string();
    }
  }
  return "libkontext_shim.so";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Serve configuration lookups of unmodified programs from a layered context spec",
               "kontext"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  app.fallthrough();

  Globals g;
  app.add_option("--spec", g.spec, "Specification file (default: $KONTEXT_SPEC)");
  app.add_option("--state", g.state, "Layer state file (default: $KONTEXT_STATE or runtime dir)");
  app.add_flag("-v,--verbose", g.verbose, "Print extra detail");
  app.add_flag("--porcelain", g.porcelain, "Line-oriented machine output");

  std::string check_path;
  auto* spec_check = app.add_subcommand("spec-check", "Validate a specification");
  spec_check->add_option("path", check_path, "Spec file (default: --spec)");

  std::string get_name;
  auto* get = app.add_subcommand("get", "Print the context-resolved value of a key");
  get->add_option("key", get_name)->required();

  std::string set_name, set_value;
  std::vector<std::string> set_meta;
  auto* set = app.add_subcommand("set", "Set a key in the specification file");
  set->add_option("key", set_name)->required();
  set->add_option("value", set_value)->required();
  set->add_option("--meta", set_meta, "Metadata property=value (repeatable)");

  std::string layer_action, notify_list, signal = "HUP";
  std::vector<std::string> layer_args;
  auto* layer = app.add_subcommand("layer", "Inspect or change layer state");
  layer->add_option("action", layer_action, "set | unset | list")->required();
  layer->add_option("args", layer_args);
  layer->add_option("--notify", notify_list, "Comma-separated pids to signal after a change");
  layer->add_option("--signal", signal, "HUP, USR1 or USR2")->capture_default_str();

  auto* run_cmd = app.add_subcommand("run", "Run a program with the shim preloaded");
  run_cmd->prefix_command();
  run_cmd->fallthrough(false);

  long startup_ms = 1000;
  if (const char* env = std::getenv(std::string(shim::kEnvStartupMs).c_str()); env && *env) {
    try {
      startup_ms = std::stol(env);
    } catch (const std::exception&) {
    }
  }
  std::string trace_out;
  auto* trace_cmd = app.add_subcommand("trace", "Run a program and summarize its getenv calls");
  trace_cmd->add_option("--startup-ms", startup_ms, "Startup window in milliseconds")
      ->capture_default_str();
  trace_cmd->add_option("--trace-out", trace_out, "Keep the raw trace in this file");
  trace_cmd->prefix_command();
  trace_cmd->fallthrough(false);

  std::string scan_root, scan_word = std::string(scan::kDefaultWord);
  std::vector<std::string> scan_ext;
  auto* scan_cmd = app.add_subcommand("scan", "Count getenv occurrences and lines of code");
  scan_cmd->add_option("root", scan_root)->required();
  scan_cmd->add_option("--ext", scan_ext, "Extensions to scan")->delimiter(',');
  scan_cmd->add_option("--word", scan_word, "Identifier to look for")->capture_default_str();

  std::size_t iterations = 100'000, changes = 10;
  std::string bench_name;
  auto* bench_cmd = app.add_subcommand("bench", "Measure shim getenv overhead in-process");
  bench_cmd->add_option("--iterations", iterations)->capture_default_str();
  bench_cmd->add_option("--name", bench_name, "Variable to query");
  bench_cmd->add_option("--changes", changes, "Layer changes to inject")->capture_default_str();

  std::vector<std::string> argv_storage{"kontext"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  // CLI11 rejects a `--` separator inside prefix subcommands, so drop the
  // first one that follows `run` or `trace`.
  const auto launcher = std::find_if(argv_storage.begin() + 1, argv_storage.end(),
                                     [](const std::string& a) { return a == "run" || a == "trace"; });
  if (launcher != argv_storage.end()) {
    const auto sep = std::find(launcher + 1, argv_storage.end(), std::string("--"));
    if (sep != argv_storage.end())
      argv_storage.erase(sep);
  }
  std::vector<const char*> argv;
  for (const auto& a : argv_storage)
    argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "kontext: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*spec_check)
      return cmd_spec_check(g, check_path, out, err);
    if (*get)
      return cmd_get(g, get_name, out, err);
    if (*set)
      return cmd_set(g, set_name, set_value, set_meta, out);
    if (*layer)
      return cmd_layer(g, layer_action, layer_args, notify_list, signal, out, err);
    if (*run_cmd)
      return cmd_run(g, run_cmd->remaining(), err);
    if (*trace_cmd)
      return cmd_trace(g, startup_ms, trace_out, trace_cmd->remaining(), out, err);
    if (*scan_cmd)
      return cmd_scan(g, scan_root, scan_ext, scan_word, out, err);
    if (*bench_cmd)
      return cmd_bench(g, iterations, bench_name, changes, out);
  } catch (const UsageError& e) {
    err << "kontext: " << e.what() << '\n';
    return kUsage;
  } catch (const UnknownSignal& e) {
    err << "kontext: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidName& e) {
    err << "kontext: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidLayerValue& e) {
    err << "kontext: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "kontext: " << e.what() << '\n';
    return kDataError;
  } catch (const ExecFailed& e) {
    err << "kontext: " << e.what() << '\n';
    return kExecFailed;
  } catch (const std::exception& e) {
    err << "kontext: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace kontext::cli
