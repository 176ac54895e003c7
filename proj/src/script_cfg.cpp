#include "depmap/script_cfg.hpp"

namespace depmap::script {
namespace {

class Builder {
 public:
  Cfg build(const ScriptAst& ast) {
    int entry = fresh();
    int cur = emit_block(ast.statements, entry);
    cfg_.entry = entry;
    if (cur < 0) {
      // every path returned; reuse the last return target as exit
      cfg_.exit = exit_ >= 0 ? exit_ : entry;
    } else if (exit_ >= 0) {
      link(cur, exit_, nullptr);
      cfg_.exit = exit_;
    } else {
      cfg_.exit = cur;
    }
    cfg_.n_locations = next_;
    return std::move(cfg_);
  }

 private:
  int fresh() { return next_++; }

  void link(int from, int to, StmtPtr stmt) {
    cfg_.edges.push_back(CfgEdge{from, to, std::move(stmt)});
  }

  int ensure_exit() {
    if (exit_ < 0) exit_ = fresh();
    return exit_;
  }

  // Emits a block starting at `cur`; returns the open end location, or -1
  // when control never falls through (the block ends in a return).
  int emit_block(const Block& block, int cur) {
    for (const auto& stmt : block) {
      if (cur < 0) return -1;  // dead code after return is dropped
      cur = emit_stmt(stmt, cur);
    }
    return cur;
  }

  int emit_stmt(const StmtPtr& stmt, int cur) {
    if (const auto* s = std::get_if<IfStmt>(&stmt->node)) {
      // condition evaluation happens once on the edge into the decision
      int decision = fresh();
      link(cur, decision, make_stmt<ExprStmt>(stmt->line, s->cond));
      int then_entry = fresh();
      link(decision, then_entry, nullptr);
      int then_end = emit_block(s->then_block, then_entry);
      int merge = -1;
      auto join = [&](int end) {
        if (end < 0) return;
        if (merge < 0) merge = fresh();
        link(end, merge, nullptr);
      };
      if (s->else_block.empty()) {
        join(then_end);
        if (merge < 0) merge = fresh();
        link(decision, merge, nullptr);  // fall-through when condition is false
      } else {
        int else_entry = fresh();
        link(decision, else_entry, nullptr);
        int else_end = emit_block(s->else_block, else_entry);
        join(then_end);
        join(else_end);
        if (merge < 0) return -1;  // both branches returned
      }
      return merge;
    }
    if (const auto* s = std::get_if<WhileStmt>(&stmt->node)) {
      int head = fresh();
      link(cur, head, nullptr);
      int decision = fresh();
      link(head, decision, make_stmt<ExprStmt>(stmt->line, s->cond));
      int body_entry = fresh();
      link(decision, body_entry, nullptr);
      int body_end = emit_block(s->body, body_entry);
      if (body_end >= 0) link(body_end, head, nullptr);  // back edge
      int after = fresh();
      link(decision, after, nullptr);
      return after;
    }
    if (std::holds_alternative<ReturnStmt>(stmt->node)) {
      link(cur, ensure_exit(), stmt);
      return -1;
    }
    // Assign / ExprStmt / FuncDef / Nop: one edge in the chain. FuncDef
    // bodies are only analyzed where inlining cloned them.
    int next = fresh();
    link(cur, next, stmt);
    return next;
  }

  Cfg cfg_;
  int next_ = 0;
  int exit_ = -1;
};

}  // namespace

std::vector<std::vector<int>> Cfg::out_edges() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n_locations));
  for (std::size_t i = 0; i < edges.size(); ++i)
    out[static_cast<std::size_t>(edges[i].from)].push_back(static_cast<int>(i));
  return out;
}

Cfg build_cfg(const ScriptAst& ast) { return Builder().build(ast); }

}  // namespace depmap::script
