#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace depmap {

/// Symbols are compared case-sensitively and byte-exact after trimming a
/// leading "./" path prefix. No other path normalization is performed.
std::string normalize_symbol(std::string_view raw);

enum class Severity { Info, Warning, Error };

struct Diagnostic {
  Severity severity = Severity::Info;
  std::string code;     // stable machine-readable tag, e.g. "projection-coercion"
  std::string scope;    // "graph/activity" or "" for repository-level
  std::string message;
  int line = 0;         // 1-based; 0 when not tied to a source position
  int col = 0;

  std::string render() const;
};

bool operator==(const Diagnostic& a, const Diagnostic& b);

/// Sorts by (severity desc, scope, code, line, col, message) and removes
/// exact duplicates. Fixpoint iteration revisits statements, so duplicate
/// emission is expected and collapsed here.
void normalize_diagnostics(std::vector<Diagnostic>& diags);

/// The set of columns referenced on a data source. Either every column
/// (`All`, the lattice top — used when the real column set is statically
/// unknown) or an explicit finite set of column names.
class ColumnSet {
 public:
  ColumnSet() = default;  // empty explicit set (bottom)

  static ColumnSet all();
  static ColumnSet explicit_set(std::set<std::string> names);
  static ColumnSet of(std::initializer_list<std::string> names);

  bool is_all() const { return all_; }
  bool empty() const { return !all_ && names_.empty(); }
  /// Only meaningful when !is_all().
  const std::set<std::string>& names() const { return names_; }

  void union_with(const ColumnSet& other);

  friend bool operator==(const ColumnSet& a, const ColumnSet& b) = default;

 private:
  bool all_ = false;
  std::set<std::string> names_;
};

/// Least upper bound: All absorbs, explicit sets union.
ColumnSet column_union(const ColumnSet& a, const ColumnSet& b);

/// a ⊑ b under: Explicit(x) ⊑ Explicit(y) iff x ⊆ y; Explicit(x) ⊑ All.
bool column_leq(const ColumnSet& a, const ColumnSet& b);

/// Projection of a tracked column set onto the requested columns.
///
/// Returns Explicit(cols) and reports (via *coerced) whether the tracked
/// set was an explicit set disjoint from the request, i.e. the source was
/// never seen to carry any of the requested columns. Callers emit a
/// diagnostic for coerced projections. The requested columns are kept in
/// all cases: dropping to the intersection would make the analysis
/// transfer function non-monotone on disjoint inputs, and losing a
/// dependency is worse than reporting a spurious one.
///
/// Throws std::invalid_argument when cols is empty.
ColumnSet column_constrain(const ColumnSet& a, const std::set<std::string>& cols,
                           bool* coerced = nullptr);

/// A data source reference: a source symbol (table or file name) plus the
/// referenced columns.
struct DataSourceRef {
  std::string symbol;
  ColumnSet columns;

  DataSourceRef(std::string_view sym, ColumnSet cols);
};

/// A set of data sources keyed by symbol; at most one entry per symbol,
/// merged by column union on insert. This is the analysis lattice element
/// for "which sources (and columns) reach here".
class MappingSet {
 public:
  MappingSet() = default;

  void insert(std::string_view symbol, const ColumnSet& cols);
  void insert(const DataSourceRef& ref);
  void join(const MappingSet& other);
  void erase(const std::string& symbol);

  bool contains(const std::string& symbol) const;
  const ColumnSet* find(const std::string& symbol) const;

  const std::map<std::string, ColumnSet>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  friend bool operator==(const MappingSet& a, const MappingSet& b) = default;

 private:
  std::map<std::string, ColumnSet> entries_;
};

/// Piecewise union of two mapping sets (the ⊔ of the join-semilattice).
MappingSet mapping_join(const MappingSet& a, const MappingSet& b);

/// a ⊑ b: every entry of a appears in b with a ⊑ column set.
bool mapping_leq(const MappingSet& a, const MappingSet& b);

/// Result of analyzing one activity artifact: the mapping set I (sources
/// that reach the model call, or the join of all reads for activities
/// without one), the read symbols with their referenced columns, and the
/// symbols written with the sources that flow into each.
struct ActivityAnalysis {
  MappingSet mapping;
  std::map<std::string, ColumnSet> reads;
  std::map<std::string, MappingSet> writes;
  bool has_sink = false;
  bool fallback = false;  // set when built from manifest declarations after a parse failure
  std::vector<Diagnostic> diagnostics;
};

enum class ActivityKind { Script, Query };

/// A unit of pipeline work backed by an artifact file on disk.
struct Activity {
  std::string id;
  ActivityKind kind = ActivityKind::Script;
  std::string artifact_path;  // relative to the repository root
  std::vector<std::string> declared_inputs;
  std::vector<std::string> declared_outputs;
  bool model_hint = false;    // manifest override marking the model activity
  bool file_missing = false;  // recorded at ingest; such activities are excluded
};

/// Activities connected through intermediate data symbols. Edges are
/// implied by the analyses: a → b iff writes(a) ∩ reads(b) ≠ ∅.
struct ActivityGraph {
  std::string id;
  std::vector<Activity> activities;

  const Activity* find(const std::string& activity_id) const;
};

struct Repository {
  std::filesystem::path root;
  std::vector<ActivityGraph> graphs;
  std::vector<Diagnostic> diagnostics;

  const ActivityGraph* find_graph(const std::string& graph_id) const;
};

}  // namespace depmap
