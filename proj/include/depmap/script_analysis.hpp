#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "depmap/core.hpp"
#include "depmap/script_ast.hpp"
#include "depmap/script_cfg.hpp"

namespace depmap::script {

/// Function-name sets driving the transfer rules. The three sets must be
/// pairwise disjoint.
struct AnalyzerConfig {
  std::set<std::string> source_fns{"read_csv", "read_parquet", "read_json"};
  std::set<std::string> sink_fns{"fit", "fit_transform", "train"};
  std::set<std::string> output_fns{"to_csv", "to_parquet", "write"};
  int inline_depth = 3;

  void validate() const;  // throws std::invalid_argument on overlap / bad depth
};

/// Loads `analyzer.json` (keys sourceFunctions, sinkFunctions,
/// outputFunctions, inlineDepth) from a repository root. A missing file
/// yields the defaults; a malformed one throws std::runtime_error.
AnalyzerConfig load_analyzer_config(const std::filesystem::path& repo_root);

/// Map from script variables to the data sources that may flow into them.
/// A missing variable is bottom (the empty mapping set).
class AbstractState {
 public:
  const MappingSet& get(const std::string& var) const;
  MappingSet& slot(const std::string& var) { return env_[var]; }
  void set(const std::string& var, MappingSet value);        // strong update
  void join_var(const std::string& var, const MappingSet&);  // weak update

  void join(const AbstractState& other);
  const std::map<std::string, MappingSet>& env() const { return env_; }

  friend bool operator==(const AbstractState& a, const AbstractState& b) = default;

 private:
  std::map<std::string, MappingSet> env_;
};

bool state_leq(const AbstractState& a, const AbstractState& b);

/// Monotone accumulators threaded through the transfer function: the
/// mapping set I plus the read/write ledgers of the activity.
struct TransferAccum {
  MappingSet mapping;
  std::map<std::string, ColumnSet> reads;
  std::map<std::string, MappingSet> writes;
  bool has_sink = false;
  std::vector<Diagnostic> diagnostics;

  void join(const TransferAccum& other);
};

/// Applies one statement's abstract semantics in place. `activity_id`
/// names synthetic symbols for non-literal reads/writes.
void transfer(const Stmt& stmt, AbstractState& state, TransferAccum& accum,
              const AnalyzerConfig& config, const std::string& activity_id);

/// Clones locally defined function bodies into their call sites, binding
/// parameters to fresh variables, up to `depth` levels. Calls still
/// unresolved afterwards fall back to external-call semantics.
ScriptAst inline_functions(const ScriptAst& ast, int depth);

struct ScriptFixpoint {
  ActivityAnalysis analysis;
  std::vector<AbstractState> states;  // per CFG location, the computed fixpoint
};

/// Worklist fixpoint over the CFG from an empty entry state. The optional
/// seed randomizes worklist pop order (the result must not depend on it).
/// Throws std::logic_error if the visit budget (10'000 pops) is exceeded,
/// which would indicate a non-monotone transfer bug.
ScriptFixpoint analyze_script_fixpoint(const Cfg& cfg, const AnalyzerConfig& config,
                                       const std::string& activity_id = "script",
                                       std::optional<std::uint64_t> shuffle_seed = {});

ActivityAnalysis analyze_script(const Cfg& cfg, const AnalyzerConfig& config,
                                const std::string& activity_id = "script",
                                std::optional<std::uint64_t> shuffle_seed = {});

/// Full pipeline for one script artifact: parse, inline, build the CFG,
/// run the fixpoint. On a fatal parse error returns an analysis with a
/// diagnostic and `fallback` unset; the caller substitutes declared I/O.
ActivityAnalysis analyze_script_text(std::string_view text, const AnalyzerConfig& config,
                                     const std::string& activity_id = "script");

}  // namespace depmap::script
