#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "depmap/core.hpp"

namespace depmap::script {

// The analyzed script language is a small subset matching the statement
// forms the transfer rules give semantics to: assignments, calls, method
// calls, string-list subscripts, tuple assignment, if/while, and local
// function definitions. Everything else is parsed and lowered to opaque
// external-call expressions or no-ops, never a hard failure.

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct VarExpr {
  std::string name;
};

struct StrLit {
  std::string value;
};

// Covers numbers and the literal atoms with no data sources attached
// (None/True/False/...).
struct NumLit {
  std::string text;
};

struct ListLit {
  std::vector<ExprPtr> items;
};

struct TupleExpr {
  std::vector<ExprPtr> items;
};

// f(args), pd.read_csv(args), a.b.c(args). `path` has 1..3 dot segments;
// longer paths are lowered to OpaqueExpr by the parser. A two-segment path
// whose head is a plain name doubles as a method call on that variable.
struct CallExpr {
  std::vector<std::string> path;
  std::vector<ExprPtr> args;
};

// <expr>.method(args) where the receiver is itself an expression, e.g. a
// chained call. Plain `x.m(args)` parses as CallExpr instead.
struct MethodCallExpr {
  ExprPtr receiver;
  std::string method;
  std::vector<ExprPtr> args;
};

// x[["a", "b"]] or x["a"]: column projection. Non-string subscripts lower
// to OpaqueExpr.
struct SubscriptExpr {
  ExprPtr receiver;
  std::vector<std::string> columns;
};

// Anything the grammar gives no structure to: binary/unary operations,
// comprehensions, lambdas, deep dotted calls. Children are the embedded
// expressions whose sources conservatively flow to the result.
struct OpaqueExpr {
  std::vector<ExprPtr> children;
};

struct Expr {
  std::variant<VarExpr, StrLit, NumLit, ListLit, TupleExpr, CallExpr, MethodCallExpr,
               SubscriptExpr, OpaqueExpr>
      node;
  int line = 0;
  int col = 0;
};

template <typename T, typename... Args>
ExprPtr make_expr(int line, int col, Args&&... args) {
  return std::make_shared<Expr>(Expr{T{std::forward<Args>(args)...}, line, col});
}

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;
using Block = std::vector<StmtPtr>;

struct AssignStmt {
  std::vector<std::string> targets;  // tuple assignment lists every target
  ExprPtr value;
};

struct ExprStmt {
  ExprPtr value;
};

struct IfStmt {
  ExprPtr cond;
  Block then_block;
  Block else_block;
};

struct WhileStmt {
  ExprPtr cond;
  Block body;
};

struct FuncDefStmt {
  std::string name;
  std::vector<std::string> params;
  Block body;
};

struct ReturnStmt {
  ExprPtr value;  // may be null for a bare return
};

// Lowered imports, pass, decorators and other analysis-neutral lines.
struct NopStmt {};

struct Stmt {
  std::variant<AssignStmt, ExprStmt, IfStmt, WhileStmt, FuncDefStmt, ReturnStmt, NopStmt>
      node;
  int line = 0;
};

template <typename T, typename... Args>
StmtPtr make_stmt(int line, Args&&... args) {
  return std::make_shared<Stmt>(Stmt{T{std::forward<Args>(args)...}, line});
}

struct ScriptAst {
  Block statements;
};

struct ParseResult {
  std::optional<ScriptAst> ast;  // empty on a fatal lexical/structural error
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return ast.has_value(); }
};

/// Parses UTF-8 script text. Unsupported constructs lower to no-ops or
/// opaque external calls; only lexical-level damage (unterminated strings,
/// unbalanced brackets, inconsistent indentation) is fatal.
ParseResult parse_script(std::string_view text);

}  // namespace depmap::script
