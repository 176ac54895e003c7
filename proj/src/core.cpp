#include "depmap/core.hpp"

#include <algorithm>
#include <sstream>

namespace depmap {

std::string normalize_symbol(std::string_view raw) {
  while (raw.size() >= 2 && raw[0] == '.' && raw[1] == '/') raw.remove_prefix(2);
  return std::string(raw);
}

std::string Diagnostic::render() const {
  std::ostringstream out;
  switch (severity) {
    case Severity::Info: out << "info"; break;
    case Severity::Warning: out << "warning"; break;
    case Severity::Error: out << "error"; break;
  }
  out << " " << code;
  if (!scope.empty()) out << " [" << scope << "]";
  if (line > 0) {
    out << " (line " << line;
    if (col > 0) out << ", col " << col;
    out << ")";
  }
  out << ": " << message;
  return out.str();
}

bool operator==(const Diagnostic& a, const Diagnostic& b) {
  return a.severity == b.severity && a.code == b.code && a.scope == b.scope &&
         a.message == b.message && a.line == b.line && a.col == b.col;
}

void normalize_diagnostics(std::vector<Diagnostic>& diags) {
  auto key = [](const Diagnostic& d) {
    return std::tuple(static_cast<int>(d.severity) * -1, d.scope, d.code, d.line, d.col,
                      d.message);
  };
  std::sort(diags.begin(), diags.end(),
            [&](const Diagnostic& a, const Diagnostic& b) { return key(a) < key(b); });
  diags.erase(std::unique(diags.begin(), diags.end()), diags.end());
}

ColumnSet ColumnSet::all() {
  ColumnSet c;
  c.all_ = true;
  return c;
}

ColumnSet ColumnSet::explicit_set(std::set<std::string> names) {
  for (const auto& n : names) {
    if (n.empty()) throw std::invalid_argument("column name must be non-empty");
  }
  ColumnSet c;
  c.names_ = std::move(names);
  return c;
}

ColumnSet ColumnSet::of(std::initializer_list<std::string> names) {
  return explicit_set(std::set<std::string>(names));
}

void ColumnSet::union_with(const ColumnSet& other) {
  if (all_) return;
  if (other.all_) {
    all_ = true;
    names_.clear();
    return;
  }
  names_.insert(other.names_.begin(), other.names_.end());
}

ColumnSet column_union(const ColumnSet& a, const ColumnSet& b) {
  ColumnSet out = a;
  out.union_with(b);
  return out;
}

bool column_leq(const ColumnSet& a, const ColumnSet& b) {
  if (b.is_all()) return true;
  if (a.is_all()) return false;
  return std::includes(b.names().begin(), b.names().end(), a.names().begin(),
                       a.names().end());
}

ColumnSet column_constrain(const ColumnSet& a, const std::set<std::string>& cols,
                           bool* coerced) {
  if (cols.empty()) throw std::invalid_argument("constraint column set must be non-empty");
  if (coerced) {
    bool disjoint = false;
    if (!a.is_all()) {
      disjoint = std::none_of(cols.begin(), cols.end(),
                              [&](const std::string& c) { return a.names().count(c); });
    }
    *coerced = disjoint;
  }
  return ColumnSet::explicit_set(cols);
}

DataSourceRef::DataSourceRef(std::string_view sym, ColumnSet cols)
    : symbol(normalize_symbol(sym)), columns(std::move(cols)) {
  if (symbol.empty()) throw std::invalid_argument("data source symbol must be non-empty");
}

void MappingSet::insert(std::string_view symbol, const ColumnSet& cols) {
  std::string key = normalize_symbol(symbol);
  if (key.empty()) throw std::invalid_argument("data source symbol must be non-empty");
  auto [it, fresh] = entries_.try_emplace(std::move(key), cols);
  if (!fresh) it->second.union_with(cols);
}

void MappingSet::insert(const DataSourceRef& ref) { insert(ref.symbol, ref.columns); }

void MappingSet::join(const MappingSet& other) {
  for (const auto& [sym, cols] : other.entries_) insert(sym, cols);
}

void MappingSet::erase(const std::string& symbol) { entries_.erase(symbol); }

bool MappingSet::contains(const std::string& symbol) const {
  return entries_.count(symbol) != 0;
}

const ColumnSet* MappingSet::find(const std::string& symbol) const {
  auto it = entries_.find(symbol);
  return it == entries_.end() ? nullptr : &it->second;
}

MappingSet mapping_join(const MappingSet& a, const MappingSet& b) {
  MappingSet out = a;
  out.join(b);
  return out;
}

bool mapping_leq(const MappingSet& a, const MappingSet& b) {
  for (const auto& [sym, cols] : a.entries()) {
    const ColumnSet* other = b.find(sym);
    if (!other || !column_leq(cols, *other)) return false;
  }
  return true;
}

const Activity* ActivityGraph::find(const std::string& activity_id) const {
  for (const auto& a : activities) {
    if (a.id == activity_id) return &a;
  }
  return nullptr;
}

const ActivityGraph* Repository::find_graph(const std::string& graph_id) const {
  for (const auto& g : graphs) {
    if (g.id == graph_id) return &g;
  }
  return nullptr;
}

}  // namespace depmap
