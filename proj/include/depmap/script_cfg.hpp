#pragma once

#include <vector>

#include "depmap/script_ast.hpp"

namespace depmap::script {

/// A control-flow edge (l, st, l'): the semantics of `stmt` take the state
/// at `from` to the state at `to`. Branch and merge wiring uses edges with
/// a null stmt (no-ops).
struct CfgEdge {
  int from = 0;
  int to = 0;
  StmtPtr stmt;  // null for structural no-op edges
};

/// Locations are dense integers; entry is 0. Every location is reachable
/// from entry (statements behind a `return` are dropped at build time).
struct Cfg {
  int n_locations = 0;
  int entry = 0;
  int exit = 0;
  std::vector<CfgEdge> edges;

  std::vector<std::vector<int>> out_edges() const;  // location -> edge indices
};

Cfg build_cfg(const ScriptAst& ast);

}  // namespace depmap::script
