#include <algorithm>
#include <cctype>
#include <utility>

#include "depmap/script_ast.hpp"

namespace depmap::script {
namespace {

enum class Tok {
  Name,
  Str,
  Num,
  Ellipsis,
  Newline,
  Indent,
  Dedent,
  LParen,
  RParen,
  LBracket,
  RBracket,
  LBrace,
  RBrace,
  Comma,
  Dot,
  Colon,
  Semi,
  Assign,  // a single '='
  Op,      // every other operator, kept as text
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line = 0;
  int col = 0;
};

struct LexError {
  std::string message;
  int line = 0;
  int col = 0;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_op_char(char c) { return std::string_view("+-*/%<>=!&|^~@").find(c) != std::string_view::npos; }

// Tokens after which a physical line break does not end the statement.
// Covers the common style of breaking after '=' or a trailing comma.
bool continues_line(const Token& t) {
  switch (t.kind) {
    case Tok::Assign:
    case Tok::Comma:
    case Tok::Dot:
    case Tok::Op:
      return true;
    default:
      return false;
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::optional<LexError> run() {
    while (!eof()) {
      if (start_of_line_ && depth_ == 0 && !continuation_) {
        if (!handle_indent()) return error_;
        if (eof()) break;
      }
      start_of_line_ = false;
      skip_inline_space();
      if (eof()) break;
      char c = peek();
      if (c == '\n') {
        handle_newline();
        continue;
      }
      if (c == '\\' && peek(1) == '\n') {
        bump();
        bump();
        continuation_ = true;
        continue;
      }
      if (c == '\\' && peek(1) == '\r' && peek(2) == '\n') {
        bump();
        bump();
        bump();
        continuation_ = true;
        continue;
      }
      if (!lex_token()) return error_;
      continuation_ = false;
    }
    if (!tokens_.empty() && tokens_.back().kind != Tok::Newline) emit(Tok::Newline, "");
    while (indents_.size() > 1) {
      indents_.pop_back();
      emit(Tok::Dedent, "");
    }
    emit(Tok::End, "");
    return std::nullopt;
  }

  std::vector<Token> take() { return std::move(tokens_); }

 private:
  bool eof() const { return pos_ >= src_.size(); }
  char peek(std::size_t off = 0) const {
    return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
  }
  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void emit(Tok kind, std::string text) {
    tokens_.push_back(Token{kind, std::move(text), tok_line_, tok_col_});
  }

  void fail(std::string msg) { error_ = LexError{std::move(msg), line_, col_}; }

  void skip_inline_space() {
    while (!eof()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        bump();
      } else if (c == '#') {
        while (!eof() && peek() != '\n') bump();
      } else {
        break;
      }
    }
  }

  void handle_newline() {
    bump();
    if (depth_ > 0) return;  // newlines inside brackets are whitespace
    if (!tokens_.empty() && continues_line(tokens_.back())) {
      continuation_ = true;
      return;
    }
    if (!tokens_.empty() && tokens_.back().kind != Tok::Newline &&
        tokens_.back().kind != Tok::Indent && tokens_.back().kind != Tok::Dedent) {
      tok_line_ = line_ - 1;
      tok_col_ = 1;
      emit(Tok::Newline, "");
    }
    start_of_line_ = true;
  }

  // Measures the indentation of the next non-blank line and emits
  // Indent/Dedent against the indent stack.
  bool handle_indent() {
    for (;;) {
      int indent = 0;
      while (!eof() && (peek() == ' ' || peek() == '\t')) {
        indent += peek() == '\t' ? 8 - indent % 8 : 1;
        bump();
      }
      if (eof()) return true;
      if (peek() == '\r') {
        bump();
        continue;
      }
      if (peek() == '\n') {
        bump();
        continue;
      }
      if (peek() == '#') {
        while (!eof() && peek() != '\n') bump();
        continue;
      }
      tok_line_ = line_;
      tok_col_ = 1;
      if (indent > indents_.back()) {
        indents_.push_back(indent);
        emit(Tok::Indent, "");
      } else {
        while (indent < indents_.back()) {
          indents_.pop_back();
          emit(Tok::Dedent, "");
        }
        if (indent != indents_.back()) {
          fail("inconsistent indentation");
          return false;
        }
      }
      return true;
    }
  }

  bool lex_string(std::string prefix_ignored) {
    (void)prefix_ignored;
    char quote = peek();
    int start_line = line_, start_col = col_;
    bool triple = peek(1) == quote && peek(2) == quote;
    bump();
    if (triple) {
      bump();
      bump();
    }
    std::string value;
    for (;;) {
      if (eof()) {
        error_ = LexError{"unterminated string literal", start_line, start_col};
        return false;
      }
      char c = peek();
      if (!triple && c == '\n') {
        error_ = LexError{"unterminated string literal", start_line, start_col};
        return false;
      }
      if (c == '\\') {
        bump();
        if (eof()) {
          error_ = LexError{"unterminated string literal", start_line, start_col};
          return false;
        }
        char esc = peek();
        switch (esc) {
          case 'n': value.push_back('\n'); break;
          case 't': value.push_back('\t'); break;
          default: value.push_back(esc); break;
        }
        bump();
        continue;
      }
      if (c == quote) {
        if (!triple) {
          bump();
          break;
        }
        if (peek(1) == quote && peek(2) == quote) {
          bump();
          bump();
          bump();
          break;
        }
      }
      value.push_back(c);
      bump();
    }
    tok_line_ = start_line;
    tok_col_ = start_col;
    emit(Tok::Str, std::move(value));
    return true;
  }

  bool lex_token() {
    tok_line_ = line_;
    tok_col_ = col_;
    char c = peek();
    if (is_ident_start(c)) {
      std::string name;
      while (!eof() && is_ident_char(peek())) {
        name.push_back(peek());
        bump();
      }
      // f"...", r'...', rb"..." and friends are string literals
      if (name.size() <= 2 && !eof() && (peek() == '"' || peek() == '\'')) {
        bool prefix = std::all_of(name.begin(), name.end(), [](char p) {
          return std::string_view("fFrRbBuU").find(p) != std::string_view::npos;
        });
        if (prefix) return lex_string(name);
      }
      emit(Tok::Name, std::move(name));
      return true;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num;
      char prev = 0;
      while (!eof()) {
        char d = peek();
        bool take = std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.' ||
                    ((d == '+' || d == '-') && (prev == 'e' || prev == 'E'));
        if (!take) break;
        num.push_back(d);
        prev = d;
        bump();
      }
      emit(Tok::Num, std::move(num));
      return true;
    }
    if (c == '"' || c == '\'') return lex_string("");
    if (c == '.') {
      if (peek(1) == '.' && peek(2) == '.') {
        bump();
        bump();
        bump();
        emit(Tok::Ellipsis, "...");
        return true;
      }
      bump();
      emit(Tok::Dot, ".");
      return true;
    }
    switch (c) {
      case '(': bump(); ++depth_; emit(Tok::LParen, "("); return true;
      case ')': bump(); --depth_; emit(Tok::RParen, ")"); return true;
      case '[': bump(); ++depth_; emit(Tok::LBracket, "["); return true;
      case ']': bump(); --depth_; emit(Tok::RBracket, "]"); return true;
      case '{': bump(); ++depth_; emit(Tok::LBrace, "{"); return true;
      case '}': bump(); --depth_; emit(Tok::RBrace, "}"); return true;
      case ',': bump(); emit(Tok::Comma, ","); return true;
      case ':': bump(); emit(Tok::Colon, ":"); return true;
      case ';': bump(); emit(Tok::Semi, ";"); return true;
      default: break;
    }
    if (c == '=' && peek(1) != '=') {
      bump();
      emit(Tok::Assign, "=");
      return true;
    }
    if (is_op_char(c)) {
      std::string op;
      while (!eof() && is_op_char(peek())) {
        op.push_back(peek());
        bump();
      }
      emit(Tok::Op, std::move(op));
      return true;
    }
    fail(std::string("unexpected character '") + c + "'");
    return false;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  int tok_line_ = 1, tok_col_ = 1;
  std::vector<Token> tokens_;
  std::vector<int> indents_{0};
  int depth_ = 0;
  bool start_of_line_ = true;
  bool continuation_ = false;
  std::optional<LexError> error_;
};

bool is_keyword(const std::string& n) {
  static const std::set<std::string> kw = {
      "if",     "elif",   "else",    "while",  "for",    "in",     "def",     "return",
      "import", "from",   "pass",    "break",  "continue", "with", "as",      "try",
      "except", "finally", "class",  "lambda", "not",    "and",    "or",      "is",
      "None",   "True",   "False",   "del",    "global", "nonlocal", "raise", "assert",
      "yield",  "async",  "await"};
  return kw.count(n) != 0;
}

struct ParseUnexpected {
  std::string message;
  int line;
  int col;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::vector<Diagnostic>& diags)
      : toks_(std::move(toks)), diags_(diags) {}

  ScriptAst parse_file() {
    ScriptAst ast;
    parse_statements(ast.statements, /*until_dedent=*/false);
    return ast;
  }

 private:
  const Token& cur() const { return toks_[idx_]; }
  const Token& ahead(std::size_t off = 1) const {
    std::size_t i = std::min(idx_ + off, toks_.size() - 1);
    return toks_[i];
  }
  void advance() {
    if (idx_ + 1 < toks_.size()) ++idx_;
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_name(std::string_view n) const { return at(Tok::Name) && cur().text == n; }
  void expect(Tok k, const char* what) {
    if (!at(k)) throw ParseUnexpected{std::string("expected ") + what, cur().line, cur().col};
    advance();
  }

  void note(Severity sev, std::string code, std::string msg, int line, int col) {
    diags_.push_back(Diagnostic{sev, std::move(code), "", std::move(msg), line, col});
  }

  // Skips to the end of the current logical line, respecting indentation
  // structure, so one unparseable statement never derails the rest.
  void recover_to_line_end() {
    while (!at(Tok::End) && !at(Tok::Newline) && !at(Tok::Dedent) && !at(Tok::Indent))
      advance();
    if (at(Tok::Newline)) advance();
  }

  void parse_statements(Block& out, bool until_dedent) {
    for (;;) {
      if (at(Tok::End)) return;
      if (at(Tok::Dedent)) {
        if (until_dedent) {
          advance();
          return;
        }
        advance();  // stray dedent at top level; ignore
        continue;
      }
      if (at(Tok::Newline)) {
        advance();
        continue;
      }
      if (at(Tok::Indent)) {
        // A block opened by a construct we lowered away; splice its
        // statements into the enclosing block.
        advance();
        parse_statements(out, /*until_dedent=*/true);
        continue;
      }
      parse_statement(out);
    }
  }

  void parse_statement(Block& out) {
    int line = cur().line;
    try {
      dispatch_statement(out);
    } catch (const ParseUnexpected& e) {
      note(Severity::Warning, "unsupported-syntax",
           e.message + "; statement ignored", e.line, e.col);
      recover_to_line_end();
      out.push_back(make_stmt<NopStmt>(line));
    }
  }

  void dispatch_statement(Block& out) {
    int line = cur().line;
    if (at(Tok::Op) && cur().text == "@") {  // decorator
      recover_to_line_end();
      out.push_back(make_stmt<NopStmt>(line));
      return;
    }
    if (at(Tok::Name)) {
      const std::string& head = cur().text;
      if (head == "if") return parse_if(out);
      if (head == "while") return parse_while(out);
      if (head == "for") return parse_for(out);
      if (head == "def") return parse_def(out);
      if (head == "return") return parse_return(out);
      if (head == "import" || head == "from") {
        recover_to_line_end();
        out.push_back(make_stmt<NopStmt>(line));
        return;
      }
      if (head == "pass" || head == "break" || head == "continue") {
        advance();
        end_simple_stmt();
        out.push_back(make_stmt<NopStmt>(line));
        return;
      }
      if (head == "with") return parse_with(out);
      if (head == "try") return parse_try(out);
      if (head == "class") return parse_class(out);
      if (head == "raise" || head == "assert" || head == "del" || head == "global" ||
          head == "nonlocal" || head == "yield" || head == "async") {
        recover_to_line_end();
        out.push_back(make_stmt<NopStmt>(line));
        return;
      }
    }
    parse_simple(out);
  }

  void end_simple_stmt() {
    if (at(Tok::Semi)) {
      advance();
      return;
    }
    if (at(Tok::Newline)) {
      advance();
      return;
    }
    if (at(Tok::End) || at(Tok::Dedent)) return;
    throw ParseUnexpected{"expected end of statement", cur().line, cur().col};
  }

  Block parse_suite() {
    Block block;
    expect(Tok::Colon, "':'");
    if (at(Tok::Newline)) {
      advance();
      if (at(Tok::Indent)) {
        advance();
        parse_statements(block, /*until_dedent=*/true);
      } else {
        throw ParseUnexpected{"expected an indented block", cur().line, cur().col};
      }
    } else {
      // inline suite: `if c: x = 1; y = 2`
      while (!at(Tok::Newline) && !at(Tok::End)) parse_statement(block);
      if (at(Tok::Newline)) advance();
    }
    return block;
  }

  void parse_if(Block& out) {
    int line = cur().line;
    advance();  // if / elif
    ExprPtr cond = parse_expr();
    Block then_block = parse_suite();
    Block else_block;
    if (at_name("elif")) {
      parse_if(else_block);
    } else if (at_name("else")) {
      advance();
      else_block = parse_suite();
    }
    out.push_back(make_stmt<IfStmt>(line, cond, std::move(then_block), std::move(else_block)));
  }

  void parse_while(Block& out) {
    int line = cur().line;
    advance();
    ExprPtr cond = parse_expr();
    Block body = parse_suite();
    out.push_back(make_stmt<WhileStmt>(line, cond, std::move(body)));
  }

  // `for x in e: body` lowers to a while loop whose body first binds the
  // loop targets from the iterated expression, preserving the back edge.
  void parse_for(Block& out) {
    int line = cur().line;
    advance();
    std::vector<std::string> targets;
    for (;;) {
      if (!at(Tok::Name) || is_keyword(cur().text))
        throw ParseUnexpected{"expected loop variable", cur().line, cur().col};
      targets.push_back(cur().text);
      advance();
      if (at(Tok::Comma)) {
        advance();
        continue;
      }
      break;
    }
    if (!at_name("in")) throw ParseUnexpected{"expected 'in'", cur().line, cur().col};
    advance();
    ExprPtr iter = parse_expr();
    Block body = parse_suite();
    Block lowered;
    lowered.push_back(make_stmt<AssignStmt>(
        line, targets, make_expr<OpaqueExpr>(line, 0, std::vector<ExprPtr>{iter})));
    for (auto& st : body) lowered.push_back(std::move(st));
    out.push_back(
        make_stmt<WhileStmt>(line, make_expr<NumLit>(line, 0, "1"), std::move(lowered)));
  }

  void parse_def(Block& out) {
    int line = cur().line;
    advance();
    if (!at(Tok::Name)) throw ParseUnexpected{"expected function name", cur().line, cur().col};
    std::string name = cur().text;
    advance();
    expect(Tok::LParen, "'('");
    std::vector<std::string> params;
    while (!at(Tok::RParen)) {
      if (at(Tok::Op) && (cur().text == "*" || cur().text == "**")) advance();
      if (at(Tok::Name) && !is_keyword(cur().text)) {
        params.push_back(cur().text);
        advance();
        if (at(Tok::Assign)) {  // default value; parsed and dropped
          advance();
          parse_expr();
        }
        if (at(Tok::Colon)) {  // annotation
          advance();
          parse_expr();
        }
      } else if (at(Tok::Comma)) {
        // tolerated stray comma
      } else {
        throw ParseUnexpected{"unexpected token in parameter list", cur().line, cur().col};
      }
      if (at(Tok::Comma)) advance();
    }
    advance();  // ')'
    if (at(Tok::Op) && cur().text == "->") {  // return annotation
      advance();
      parse_expr();
    }
    Block body = parse_suite();
    out.push_back(make_stmt<FuncDefStmt>(line, std::move(name), std::move(params),
                                         std::move(body)));
  }

  void parse_return(Block& out) {
    int line = cur().line;
    advance();
    ExprPtr value;
    if (!at(Tok::Newline) && !at(Tok::End) && !at(Tok::Dedent) && !at(Tok::Semi)) {
      value = parse_expr_list_as_one();
    }
    end_simple_stmt();
    out.push_back(make_stmt<ReturnStmt>(line, value));
  }

  void parse_with(Block& out) {
    int line = cur().line;
    advance();
    for (;;) {
      ExprPtr item = parse_expr();
      if (at_name("as")) {
        advance();
        if (!at(Tok::Name)) throw ParseUnexpected{"expected name", cur().line, cur().col};
        std::string target = cur().text;
        advance();
        out.push_back(make_stmt<AssignStmt>(
            line, std::vector<std::string>{target},
            make_expr<OpaqueExpr>(line, 0, std::vector<ExprPtr>{item})));
      } else {
        out.push_back(make_stmt<ExprStmt>(line, item));
      }
      if (at(Tok::Comma)) {
        advance();
        continue;
      }
      break;
    }
    Block body = parse_suite();
    for (auto& st : body) out.push_back(std::move(st));
  }

  // try/except/else/finally bodies all splice into the enclosing block:
  // a may-analysis treats every clause as possibly executed.
  void parse_try(Block& out) {
    advance();
    Block body = parse_suite();
    for (auto& st : body) out.push_back(std::move(st));
    while (at_name("except") || at_name("else") || at_name("finally")) {
      bool is_except = at_name("except");
      advance();
      if (is_except && !at(Tok::Colon)) {
        parse_expr();
        if (at_name("as")) {
          advance();
          if (at(Tok::Name)) advance();
        }
      }
      Block clause = parse_suite();
      for (auto& st : clause) out.push_back(std::move(st));
    }
  }

  void parse_class(Block& out) {
    int line = cur().line;
    advance();
    while (!at(Tok::Colon) && !at(Tok::Newline) && !at(Tok::End)) advance();
    if (at(Tok::Colon)) {
      Block dropped = parse_suite();
      note(Severity::Info, "class-lowered", "class body has no analysis semantics", line, 0);
    }
    out.push_back(make_stmt<NopStmt>(line));
  }

  void parse_simple(Block& out) {
    int line = cur().line;
    std::vector<ExprPtr> first = parse_expr_list();

    // augmented assignment: `x += e` and friends
    if (at(Tok::Op) && cur().text.size() >= 2 && cur().text.back() == '=' &&
        cur().text != "==" && cur().text != "!=" && cur().text != "<=" && cur().text != ">=") {
      advance();
      ExprPtr rhs = parse_expr_list_as_one();
      end_simple_stmt();
      std::vector<std::string> targets = targets_of(first, &rhs, line);
      out.push_back(make_stmt<AssignStmt>(
          line, std::move(targets),
          make_expr<OpaqueExpr>(line, 0, augment(first, rhs))));
      return;
    }

    if (!at(Tok::Assign)) {
      end_simple_stmt();
      ExprPtr value = first.size() == 1
                          ? first[0]
                          : make_expr<TupleExpr>(line, 0, std::move(first));
      out.push_back(make_stmt<ExprStmt>(line, value));
      return;
    }

    // assignment chains: a = b = expr
    std::vector<std::vector<ExprPtr>> groups{std::move(first)};
    std::vector<ExprPtr> last;
    while (at(Tok::Assign)) {
      advance();
      last = parse_expr_list();
      if (at(Tok::Assign)) groups.push_back(last);
    }
    end_simple_stmt();
    ExprPtr value =
        last.size() == 1 ? last[0] : make_expr<TupleExpr>(line, 0, std::move(last));

    std::vector<std::string> targets;
    bool any_indirect = false;
    for (const auto& group : groups) {
      for (const auto& t : group) {
        if (const auto* v = std::get_if<VarExpr>(&t->node)) {
          targets.push_back(v->name);
        } else {
          any_indirect = true;
          if (auto base = base_var(t)) targets.push_back(*base);
        }
      }
    }
    if (any_indirect) {
      // e.g. `x["new"] = e`: the receiver accumulates the RHS sources, so
      // force plain external-call (weak join) semantics for the value.
      value = make_expr<OpaqueExpr>(line, 0, std::vector<ExprPtr>{value});
    }
    if (targets.empty()) {
      out.push_back(make_stmt<ExprStmt>(line, value));
      return;
    }
    out.push_back(make_stmt<AssignStmt>(line, std::move(targets), value));
  }

  static std::vector<ExprPtr> augment(const std::vector<ExprPtr>& lhs, ExprPtr rhs) {
    std::vector<ExprPtr> children = lhs;
    children.push_back(std::move(rhs));
    return children;
  }

  std::vector<std::string> targets_of(const std::vector<ExprPtr>& exprs, ExprPtr* /*rhs*/,
                                      int /*line*/) {
    std::vector<std::string> out;
    for (const auto& e : exprs) {
      if (const auto* v = std::get_if<VarExpr>(&e->node)) {
        out.push_back(v->name);
      } else if (auto base = base_var(e)) {
        out.push_back(*base);
      }
    }
    return out;
  }

  static std::optional<std::string> base_var(const ExprPtr& e) {
    if (const auto* v = std::get_if<VarExpr>(&e->node)) return v->name;
    if (const auto* s = std::get_if<SubscriptExpr>(&e->node)) return base_var(s->receiver);
    if (const auto* o = std::get_if<OpaqueExpr>(&e->node)) {
      if (!o->children.empty()) return base_var(o->children.front());
    }
    if (const auto* m = std::get_if<MethodCallExpr>(&e->node)) return base_var(m->receiver);
    return std::nullopt;
  }

  std::vector<ExprPtr> parse_expr_list() {
    std::vector<ExprPtr> items{parse_expr()};
    while (at(Tok::Comma)) {
      advance();
      if (at(Tok::Assign) || at(Tok::Newline) || at(Tok::End)) break;  // trailing comma
      items.push_back(parse_expr());
    }
    return items;
  }

  ExprPtr parse_expr_list_as_one() {
    int line = cur().line;
    std::vector<ExprPtr> items = parse_expr_list();
    return items.size() == 1 ? items[0] : make_expr<TupleExpr>(line, 0, std::move(items));
  }

  ExprPtr parse_expr() {
    ExprPtr lhs = parse_operand();
    // conditional expression: a if c else b
    if (at_name("if")) {
      int line = cur().line;
      advance();
      ExprPtr cond = parse_operand();
      std::vector<ExprPtr> parts{lhs, cond};
      if (at_name("else")) {
        advance();
        parts.push_back(parse_expr());
      }
      return make_expr<OpaqueExpr>(line, 0, std::move(parts));
    }
    return lhs;
  }

  // All binary operators collapse to opaque joins: only the structural
  // forms (calls, projections) carry special transfer semantics.
  ExprPtr parse_operand() {
    ExprPtr lhs = parse_unary();
    for (;;) {
      bool is_binop = false;
      if (at(Tok::Op)) {
        const std::string& op = cur().text;
        bool augmented = op.size() >= 2 && op.back() == '=' && op != "==" && op != "!=" &&
                         op != "<=" && op != ">=";
        is_binop = !augmented && op != "@";
      } else if (at(Tok::Name)) {
        const std::string& n = cur().text;
        is_binop = n == "and" || n == "or" || n == "in" || n == "is" || n == "not";
      }
      if (!is_binop) return lhs;
      int line = cur().line;
      advance();
      if (at_name("in") || at_name("not")) advance();  // `not in`, `is not`
      ExprPtr rhs = parse_unary();
      lhs = make_expr<OpaqueExpr>(line, 0, std::vector<ExprPtr>{lhs, rhs});
    }
  }

  ExprPtr parse_unary() {
    if ((at(Tok::Op) && (cur().text == "-" || cur().text == "+" || cur().text == "~")) ||
        at_name("not") || at_name("await")) {
      int line = cur().line;
      advance();
      return make_expr<OpaqueExpr>(line, 0, std::vector<ExprPtr>{parse_unary()});
    }
    return parse_postfix();
  }

  // Collects every plain name inside an unparseable bracketed region so
  // their sources still flow (comprehensions, slices, dict displays).
  ExprPtr recover_balanced(int line, int col) {
    std::vector<ExprPtr> vars;
    int depth = 1;
    while (depth > 0 && !at(Tok::End)) {
      switch (cur().kind) {
        case Tok::LParen:
        case Tok::LBracket:
        case Tok::LBrace: ++depth; break;
        case Tok::RParen:
        case Tok::RBracket:
        case Tok::RBrace: --depth; break;
        case Tok::Name:
          if (!is_keyword(cur().text))
            vars.push_back(make_expr<VarExpr>(cur().line, cur().col, cur().text));
          break;
        default: break;
      }
      advance();
    }
    return make_expr<OpaqueExpr>(line, col, std::move(vars));
  }

  std::vector<ExprPtr> parse_args() {
    std::vector<ExprPtr> args;
    std::size_t open_idx = idx_;
    int line = cur().line, col = cur().col;
    try {
      while (!at(Tok::RParen)) {
        if (at(Tok::Op) && (cur().text == "*" || cur().text == "**")) advance();
        if (at(Tok::Name) && !is_keyword(cur().text) && ahead().kind == Tok::Assign) {
          advance();  // keyword argument name
          advance();  // '='
        }
        args.push_back(parse_expr());
        if (at(Tok::Comma)) {
          advance();
          continue;
        }
        break;
      }
      expect(Tok::RParen, "')'");
    } catch (const ParseUnexpected&) {
      idx_ = open_idx;
      args.clear();
      args.push_back(recover_balanced(line, col));
    }
    return args;
  }

  ExprPtr materialize_path(const std::vector<std::string>& path, int line, int col) {
    if (path.size() == 1) return make_expr<VarExpr>(line, col, path[0]);
    // dotted name used as a value: only the head could be a variable
    return make_expr<OpaqueExpr>(line, col,
                                 std::vector<ExprPtr>{make_expr<VarExpr>(line, col, path[0])});
  }

  ExprPtr parse_postfix() {
    int line = cur().line, col = cur().col;
    std::vector<std::string> path;  // non-empty while in dotted-name mode
    ExprPtr value;

    if (at(Tok::Name) && !is_keyword(cur().text)) {
      path.push_back(cur().text);
      advance();
    } else {
      value = parse_atom();
    }

    for (;;) {
      if (at(Tok::Dot)) {
        if (ahead().kind != Tok::Name) {
          advance();
          continue;
        }
        if (!path.empty()) {
          advance();
          path.push_back(cur().text);
          advance();
          continue;
        }
        // attribute or method on a computed value
        advance();
        std::string member = cur().text;
        advance();
        if (at(Tok::LParen)) {
          advance();
          std::vector<ExprPtr> args = parse_args();
          value = make_expr<MethodCallExpr>(line, col, value, std::move(member),
                                            std::move(args));
        } else {
          value = make_expr<OpaqueExpr>(line, col, std::vector<ExprPtr>{value});
        }
        continue;
      }
      if (at(Tok::LParen)) {
        advance();
        std::vector<ExprPtr> args = parse_args();
        if (!path.empty()) {
          if (path.size() <= 3) {
            value = make_expr<CallExpr>(line, col, path, std::move(args));
          } else {
            // deep dotted callee: no variable receiver, treat as external
            value = make_expr<OpaqueExpr>(line, col, std::move(args));
          }
          path.clear();
        } else {
          // call of a computed value, e.g. f()(x)
          std::vector<ExprPtr> children{value};
          for (auto& a : args) children.push_back(std::move(a));
          value = make_expr<OpaqueExpr>(line, col, std::move(children));
        }
        continue;
      }
      if (at(Tok::LBracket)) {
        if (!path.empty()) {
          value = materialize_path(path, line, col);
          path.clear();
        }
        advance();
        value = parse_subscript(value, line, col);
        continue;
      }
      break;
    }
    if (!path.empty()) value = materialize_path(path, line, col);
    return value;
  }

  // `x["c"]` and `x[["a", "b"]]` are column projections; any other index
  // shape joins conservatively.
  ExprPtr parse_subscript(ExprPtr base, int line, int col) {
    std::size_t open_idx = idx_;
    try {
      if (at(Tok::Str)) {
        std::string name = cur().text;
        advance();
        if (at(Tok::RBracket)) {
          advance();
          return make_expr<SubscriptExpr>(line, col, base,
                                          std::vector<std::string>{std::move(name)});
        }
        throw ParseUnexpected{"not a plain projection", cur().line, cur().col};
      }
      if (at(Tok::LBracket)) {
        advance();
        std::vector<std::string> names;
        while (at(Tok::Str)) {
          names.push_back(cur().text);
          advance();
          if (at(Tok::Comma)) advance();
        }
        if (!names.empty() && at(Tok::RBracket)) {
          advance();
          if (at(Tok::RBracket)) {
            advance();
            return make_expr<SubscriptExpr>(line, col, base, std::move(names));
          }
        }
        throw ParseUnexpected{"not a string-list projection", cur().line, cur().col};
      }
      throw ParseUnexpected{"unsupported subscript", cur().line, cur().col};
    } catch (const ParseUnexpected&) {
      idx_ = open_idx;
      ExprPtr index = recover_balanced(line, col);
      std::vector<ExprPtr> children{base, index};
      return make_expr<OpaqueExpr>(line, col, std::move(children));
    }
  }

  ExprPtr parse_atom() {
    int line = cur().line, col = cur().col;
    switch (cur().kind) {
      case Tok::Str: {
        std::string value = cur().text;
        advance();
        while (at(Tok::Str)) {  // implicit concatenation
          value += cur().text;
          advance();
        }
        return make_expr<StrLit>(line, col, std::move(value));
      }
      case Tok::Num:
      case Tok::Ellipsis: {
        std::string text = cur().text;
        advance();
        return make_expr<NumLit>(line, col, std::move(text));
      }
      case Tok::Name: {
        const std::string& n = cur().text;
        if (n == "None" || n == "True" || n == "False") {
          std::string text = n;
          advance();
          return make_expr<NumLit>(line, col, std::move(text));
        }
        if (n == "lambda") {
          advance();
          while (!at(Tok::Colon) && !at(Tok::Newline) && !at(Tok::End)) advance();
          if (at(Tok::Colon)) advance();
          ExprPtr body = parse_expr();
          return make_expr<OpaqueExpr>(line, col, std::vector<ExprPtr>{body});
        }
        if (is_keyword(n))
          throw ParseUnexpected{"unexpected keyword '" + n + "'", line, col};
        // plain name; parse_postfix handles this path normally
        std::string name = n;
        advance();
        return make_expr<VarExpr>(line, col, std::move(name));
      }
      case Tok::LParen: {
        advance();
        std::size_t open_idx = idx_;
        try {
          if (at(Tok::RParen)) {
            advance();
            return make_expr<NumLit>(line, col, "()");
          }
          std::vector<ExprPtr> items{parse_expr()};
          bool tuple = false;
          while (at(Tok::Comma)) {
            tuple = true;
            advance();
            if (at(Tok::RParen)) break;
            items.push_back(parse_expr());
          }
          expect(Tok::RParen, "')'");
          if (!tuple) return items[0];
          return make_expr<TupleExpr>(line, col, std::move(items));
        } catch (const ParseUnexpected&) {
          idx_ = open_idx;
          return recover_balanced(line, col);
        }
      }
      case Tok::LBracket: {
        advance();
        std::size_t open_idx = idx_;
        try {
          std::vector<ExprPtr> items;
          while (!at(Tok::RBracket)) {
            items.push_back(parse_expr());
            if (at(Tok::Comma)) {
              advance();
              continue;
            }
            break;
          }
          expect(Tok::RBracket, "']'");
          return make_expr<ListLit>(line, col, std::move(items));
        } catch (const ParseUnexpected&) {
          idx_ = open_idx;
          return recover_balanced(line, col);
        }
      }
      case Tok::LBrace: {
        advance();
        return recover_balanced(line, col);
      }
      default:
        throw ParseUnexpected{"unexpected token", line, col};
    }
  }

  std::vector<Token> toks_;
  std::size_t idx_ = 0;
  std::vector<Diagnostic>& diags_;
};

}  // namespace

ParseResult parse_script(std::string_view text) {
  ParseResult result;
  Lexer lexer(text);
  if (auto err = lexer.run()) {
    result.diagnostics.push_back(Diagnostic{Severity::Error, "syntax-error", "",
                                            err->message, err->line, err->col});
    return result;
  }
  Parser parser(lexer.take(), result.diagnostics);
  result.ast = parser.parse_file();
  return result;
}

}  // namespace depmap::script
