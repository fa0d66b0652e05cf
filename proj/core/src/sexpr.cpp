#include "arbor/sexpr.hpp"

#include <cctype>
#include <vector>

namespace arbor {

namespace {

struct Tok {
  enum Kind { LParen, RParen, Atom, Str } kind;
  std::string text;
};

std::vector<Tok> lex(const std::string& s) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(') {
      out.push_back({Tok::LParen, "("});
      ++i;
    } else if (c == ')') {
      out.push_back({Tok::RParen, ")"});
      ++i;
    } else if (c == '"') {
      std::size_t j = s.find('"', i + 1);
      if (j == std::string::npos) throw std::invalid_argument("unterminated string in s-expression");
      out.push_back({Tok::Str, s.substr(i + 1, j - i - 1)});
      i = j + 1;
    } else {
      std::size_t j = i;
      while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' && s[j] != ')')
        ++j;
      out.push_back({Tok::Atom, s.substr(i, j - i)});
      i = j;
    }
  }
  return out;
}

struct Parser {
  const std::vector<Tok>& toks;
  std::size_t pos;
  const MachineRegistry& machines;

  const Tok& peek() {
    if (pos >= toks.size()) throw std::invalid_argument("unexpected end of s-expression");
    return toks[pos];
  }
  Tok next() {
    Tok t = peek();
    ++pos;
    return t;
  }
  void expect(Tok::Kind k) {
    if (next().kind != k) throw std::invalid_argument("malformed s-expression");
  }

  long long parse_int() {
    Tok t = next();
    if (t.kind != Tok::Atom) throw std::invalid_argument("expected integer");
    return std::stoll(t.text);
  }

  Expr parse() {
    expect(Tok::LParen);
    Tok head = next();
    if (head.kind != Tok::Atom) throw std::invalid_argument("expected operator atom");
    const std::string& op = head.text;
    Expr result;
    if (op == "id") {
      result = identity(static_cast<unsigned>(parse_int()));
    } else if (op == "gen") {
      Tok mname = next();
      Tok sname = next();
      auto it = machines.find(mname.text);
      if (it == machines.end()) throw std::invalid_argument("unknown machine: " + mname.text);
      result = gen(it->second, sname.text);
    } else if (op == "rooted") {
      std::vector<std::uint32_t> img;
      while (peek().kind == Tok::Atom) img.push_back(static_cast<std::uint32_t>(parse_int()));
      result = rooted(Perm(std::move(img)));
    } else if (op == "*") {
      std::vector<Expr> parts;
      while (peek().kind == Tok::LParen) parts.push_back(parse());
      if (parts.empty()) throw std::invalid_argument("empty product");
      result = parts[0];
      for (std::size_t i = 1; i < parts.size(); ++i) result = product(result, parts[i]);
    } else if (op == "inv") {
      result = inverse(parse());
    } else if (op == "graft") {
      Expr g = parse();
      Tok v = next();
      if (v.kind != Tok::Str) throw std::invalid_argument("graft vertex must be a quoted digit string");
      result = graft(g, Vertex::parse(v.text, g.arity()));
    } else if (op == "trunc") {
      Expr g = parse();
      result = trunc(g, static_cast<std::size_t>(parse_int()));
    } else if (op == "conj") {
      Expr g = parse();
      result = conjugate(g, parse());
    } else if (op == "comm") {
      Expr g = parse();
      result = commutator(g, parse());
    } else if (op == "pow") {
      Expr g = parse();
      result = power(g, parse_int());
    } else if (op == "delete") {
      Expr g = parse();
      result = delete_levels_embed(g, static_cast<unsigned>(parse_int()));
    } else {
      throw std::invalid_argument("unknown s-expression operator: " + op);
    }
    expect(Tok::RParen);
    return result;
  }
};

struct Writer {
  const MachineRegistry& machines;

  std::string machine_name(const MachinePtr& m) const {
    for (const auto& [name, ptr] : machines)
      if (ptr == m) return name;
    if (!m->name().empty()) return m->name();
    throw std::invalid_argument("machine is not registered for serialization");
  }

  std::string run(Expr x) const {
    switch (x.kind()) {
      case ExprKind::Identity:
        return "(id " + std::to_string(x.arity()) + ")";
      case ExprKind::Gen: {
        const auto& mach = expr_machine(x);
        return "(gen " + machine_name(mach) + " " +
               mach->states()[static_cast<std::size_t>(expr_state(x))].name + ")";
      }
      case ExprKind::Rooted: {
        std::string s = "(rooted";
        for (auto i : root_label(x).images()) s += " " + std::to_string(i);
        return s + ")";
      }
      case ExprKind::Product:
        return "(* " + run(expr_child(x, 0)) + " " + run(expr_child(x, 1)) + ")";
      case ExprKind::Inverse:
        return "(inv " + run(expr_child(x, 0)) + ")";
      case ExprKind::Graft:
        return "(graft " + run(expr_child(x, 0)) + " \"" + expr_vertex(x).str() + "\")";
      case ExprKind::Truncate:
        return "(trunc " + run(expr_child(x, 0)) + " " + std::to_string(expr_level(x)) + ")";
      case ExprKind::DeleteLevels:
        return "(delete " + run(expr_child(x, 0)) + " " + std::to_string(expr_level(x)) + ")";
      default:
        throw std::invalid_argument("expression kind has no s-expression form");
    }
  }
};

}  // namespace

Expr parse_sexpr(const std::string& text, const MachineRegistry& machines) {
  auto toks = lex(text);
  Parser p{toks, 0, machines};
  Expr e = p.parse();
  if (p.pos != toks.size()) throw std::invalid_argument("trailing tokens in s-expression");
  return e;
}

std::string to_sexpr(Expr e, const MachineRegistry& machines) {
  Writer w{machines};
  return w.run(e);
}

}  // namespace arbor
