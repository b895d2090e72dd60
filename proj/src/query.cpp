#include "pafa/query.hpp"

#include <cctype>
#include <charconv>

namespace pafa::query {

const char* to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Query query() {
    Query q;
    expect('/', "'/'");
    q.segments.push_back(segment());
    while (peek() == '/') {
      ++pos_;
      q.segments.push_back(segment());
    }
    if (peek() == '#') {
      ++pos_;
      q.index = integer();
    }
    end();
    return q;
  }

  Predicate standalone_predicate() {
    auto p = predicate();
    end();
    return p;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void expect(char c, const char* what) {
    if (peek() != c) throw SyntaxError(pos_, what);
    ++pos_;
  }

  void end() {
    if (peek() != '\0') throw SyntaxError(pos_, "end of input");
  }

  static bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::string name() {
    if (!name_start(peek())) throw SyntaxError(pos_, "name");
    auto start = pos_;
    while (pos_ < text_.size() && name_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  Segment segment() {
    Segment s;
    s.name = name();
    if (peek() == '[') {
      ++pos_;
      s.predicate = predicate();
      expect(']', "']'");
    }
    return s;
  }

  Predicate predicate() {
    Predicate p;
    p.path.push_back(name());
    while (peek() == '.') {
      ++pos_;
      if (p.path.size() == kMaxPathLength) throw SyntaxError(pos_ - 1, "operator (path longer than 3 names)");
      p.path.push_back(name());
    }
    p.op = op();
    p.rhs = literal();
    return p;
  }

  CompareOp op() {
    char c = peek();
    auto next = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
    switch (c) {
      case '=': pos_ += 1; return CompareOp::Eq;
      case '!':
        if (next == '=') { pos_ += 2; return CompareOp::Ne; }
        break;
      case '<':
        if (next == '=') { pos_ += 2; return CompareOp::Le; }
        pos_ += 1;
        return CompareOp::Lt;
      case '>':
        if (next == '=') { pos_ += 2; return CompareOp::Ge; }
        pos_ += 1;
        return CompareOp::Gt;
      default: break;
    }
    throw SyntaxError(pos_, "operator");
  }

  std::int64_t integer() {
    skip_ws();
    auto start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
    auto digits = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == digits) throw SyntaxError(start, "integer");
    std::int64_t v = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc{}) throw SyntaxError(start, "integer in range");
    return v;
  }

  Literal literal() {
    char c = peek();
    auto start = pos_;
    if (c == '"') return quoted();
    if (name_start(c)) {
      auto word = name();
      if (word == "true") return true;
      if (word == "false") return false;
      throw SyntaxError(start, "literal");
    }
    if (c != '-' && !std::isdigit(static_cast<unsigned char>(c))) throw SyntaxError(pos_, "literal");
    auto i = pos_;
    if (text_[i] == '-') ++i;
    auto digits = i;
    while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) ++i;
    if (i == digits) throw SyntaxError(start, "literal");
    bool is_real = false;
    if (i < text_.size() && text_[i] == '.') {
      is_real = true;
      ++i;
      auto frac = i;
      while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) ++i;
      if (i == frac) throw SyntaxError(i, "digit");
    }
    if (i < text_.size() && (text_[i] == 'e' || text_[i] == 'E')) {
      is_real = true;
      ++i;
      if (i < text_.size() && (text_[i] == '+' || text_[i] == '-')) ++i;
      auto exp = i;
      while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) ++i;
      if (i == exp) throw SyntaxError(i, "digit");
    }
    pos_ = i;
    if (is_real) {
      double v = 0;
      auto res = std::from_chars(text_.data() + start, text_.data() + i, v);
      if (res.ec != std::errc{}) throw SyntaxError(start, "real in range");
      return v;
    }
    std::int64_t v = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + i, v);
    if (res.ec != std::errc{}) throw SyntaxError(start, "integer in range");
    return v;
  }

  Literal quoted() {
    ++pos_;
    std::string out;
    while (pos_ < text_.size()) {
      char c = text_[pos_++];
      if (c == '"') return out;
      if (c == '\\') {
        if (pos_ >= text_.size()) break;
        out.push_back(text_[pos_++]);
      } else {
        out.push_back(c);
      }
    }
    throw SyntaxError(pos_, "closing '\"'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Query parse_query(std::string_view text) { return Parser(text).query(); }

Predicate parse_predicate(std::string_view text) { return Parser(text).standalone_predicate(); }

std::string render(const Literal& literal) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          auto s = format_real(v);
          if (s.find_first_of(".eE") == std::string::npos) s += ".0";
          return s;
        } else if constexpr (std::is_same_v<T, std::string>) {
          std::string out = "\"";
          for (char c : v) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
          }
          out.push_back('"');
          return out;
        } else {
          return v ? "true" : "false";
        }
      },
      literal);
}

std::string render(const Predicate& predicate) {
  std::string out;
  for (std::size_t i = 0; i < predicate.path.size(); ++i) {
    if (i != 0) out.push_back('.');
    out += predicate.path[i];
  }
  out += to_string(predicate.op);
  out += render(predicate.rhs);
  return out;
}

std::string render(const Query& query) {
  std::string out;
  for (const auto& seg : query.segments) {
    out.push_back('/');
    out += seg.name;
    if (seg.predicate) {
      out.push_back('[');
      out += render(*seg.predicate);
      out.push_back(']');
    }
  }
  if (query.index) out += "#" + std::to_string(*query.index);
  return out;
}

namespace {

using meta::Kind;
using meta::MetaClass;
using meta::ModelStore;
using meta::ObjectId;
using meta::Value;

bool is_equality(CompareOp op) { return op == CompareOp::Eq || op == CompareOp::Ne; }

// Resolves and type-checks a predicate path starting at `cls`; returns the
// attribute at the end of the path.
const meta::AttributeDef& check_predicate(const Predicate& p, const ModelStore& store, const MetaClass& cls) {
  const MetaClass* cur = &cls;
  for (std::size_t i = 0; i + 1 < p.path.size(); ++i) {
    const auto* ref = cur->reference(p.path[i]);
    if (ref == nullptr) {
      if (cur->attribute(p.path[i]) != nullptr) {
        throw Error(ErrorKind::KindMismatch, cur->name + "." + p.path[i] + " is not a reference");
      }
      throw Error(ErrorKind::UnknownMember, cur->name + "." + p.path[i]);
    }
    cur = &store.get_class(ref->target);
  }
  const auto& last = p.path.back();
  const auto* attr = cur->attribute(last);
  if (attr == nullptr) {
    if (cur->reference(last) != nullptr) {
      throw Error(ErrorKind::KindMismatch, cur->name + "." + last + " is a reference, not comparable");
    }
    throw Error(ErrorKind::UnknownMember, cur->name + "." + last);
  }
  bool ok = false;
  switch (attr->kind) {
    case Kind::Int: ok = std::holds_alternative<std::int64_t>(p.rhs); break;
    case Kind::Real:
      ok = std::holds_alternative<double>(p.rhs) || std::holds_alternative<std::int64_t>(p.rhs);
      break;
    case Kind::Text:
    case Kind::EnumRef: ok = std::holds_alternative<std::string>(p.rhs) && is_equality(p.op); break;
    case Kind::Bool: ok = std::holds_alternative<bool>(p.rhs) && is_equality(p.op); break;
  }
  if (!ok) {
    throw Error(ErrorKind::KindMismatch, "cannot compare " + cur->name + "." + last + " (" +
                                             meta::to_string(attr->kind) + ") with " + render(p));
  }
  return *attr;
}

template <typename T>
bool compare(const T& lhs, CompareOp op, const T& rhs) {
  switch (op) {
    case CompareOp::Eq: return lhs == rhs;
    case CompareOp::Ne: return lhs != rhs;
    case CompareOp::Lt: return lhs < rhs;
    case CompareOp::Le: return lhs <= rhs;
    case CompareOp::Gt: return lhs > rhs;
    case CompareOp::Ge: return lhs >= rhs;
  }
  return false;
}

bool compare_value(const Value& v, CompareOp op, const Literal& rhs) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return compare(*i, op, std::get<std::int64_t>(rhs));
  if (const auto* d = std::get_if<double>(&v)) {
    double r = std::holds_alternative<double>(rhs) ? std::get<double>(rhs)
                                                   : static_cast<double>(std::get<std::int64_t>(rhs));
    return compare(*d, op, r);
  }
  if (const auto* s = std::get_if<std::string>(&v)) return compare(*s, op, std::get<std::string>(rhs));
  if (const auto* e = std::get_if<meta::EnumLiteral>(&v)) return compare(e->literal, op, std::get<std::string>(rhs));
  if (const auto* b = std::get_if<bool>(&v)) return compare(*b, op, std::get<bool>(rhs));
  return false;
}

// Existential semantics: true iff some value reached along the path satisfies
// the comparison.
bool holds(const Predicate& p, const ModelStore& store, ObjectId id, std::size_t depth = 0) {
  const auto& slot = store.read(id, p.path[depth]);
  if (depth + 1 == p.path.size()) {
    for (const auto& v : slot) {
      if (compare_value(v, p.op, p.rhs)) return true;
    }
    return false;
  }
  for (const auto& v : slot) {
    if (holds(p, store, std::get<meta::ObjectRef>(v).id, depth + 1)) return true;
  }
  return false;
}

}  // namespace

bool eval_predicate(const Predicate& predicate, const ModelStore& store, ObjectId object) {
  check_predicate(predicate, store, store.class_of(object));
  return holds(predicate, store, object);
}

std::vector<Value> eval_query(const Query& query, const ModelStore& store) {
  if (query.segments.empty()) throw Error(ErrorKind::InvalidArgument, "query without segments");

  // Static pass: resolve every segment against the schema before touching
  // any object, so errors do not depend on the store's content.
  std::vector<const MetaClass*> classes;
  const MetaClass* cur = &store.get_class(query.segments.front().name);
  classes.push_back(cur);
  bool attribute_tail = false;
  for (std::size_t i = 1; i < query.segments.size(); ++i) {
    const auto& seg = query.segments[i];
    if (attribute_tail) throw Error(ErrorKind::KindMismatch, "cannot navigate below attribute values");
    if (const auto* ref = cur->reference(seg.name)) {
      cur = &store.get_class(ref->target);
      classes.push_back(cur);
    } else if (cur->attribute(seg.name) != nullptr) {
      if (seg.predicate) throw Error(ErrorKind::KindMismatch, "predicate on attribute segment " + seg.name);
      attribute_tail = true;
      classes.push_back(cur);
    } else {
      throw Error(ErrorKind::UnknownMember, cur->name + "." + seg.name);
    }
  }
  for (std::size_t i = 0; i < query.segments.size(); ++i) {
    const auto& seg = query.segments[i];
    if (seg.predicate && !(attribute_tail && i + 1 == query.segments.size())) {
      check_predicate(*seg.predicate, store, *classes[i]);
    }
  }

  std::vector<Value> items;
  const auto& first = query.segments.front();
  for (auto id : store.instances_of(first.name)) {
    if (!first.predicate || holds(*first.predicate, store, id)) items.emplace_back(meta::ObjectRef{id});
  }
  for (std::size_t i = 1; i < query.segments.size(); ++i) {
    const auto& seg = query.segments[i];
    std::vector<Value> next;
    for (const auto& item : items) {
      auto id = std::get<meta::ObjectRef>(item).id;
      for (const auto& v : store.read(id, seg.name)) {
        if (seg.predicate && !holds(*seg.predicate, store, std::get<meta::ObjectRef>(v).id)) continue;
        next.push_back(v);
      }
    }
    items = std::move(next);
  }
  if (query.index) {
    auto idx = *query.index;
    if (idx < 0 || static_cast<std::size_t>(idx) >= items.size()) return {};
    return {items[static_cast<std::size_t>(idx)]};
  }
  return items;
}

std::vector<ObjectId> eval_objects(std::string_view text, const ModelStore& store) {
  std::vector<ObjectId> out;
  for (const auto& v : eval_query(text, store)) {
    const auto* ref = std::get_if<meta::ObjectRef>(&v);
    if (ref == nullptr) throw Error(ErrorKind::KindMismatch, std::string(text) + " does not yield objects");
    out.push_back(ref->id);
  }
  return out;
}

}  // namespace pafa::query

namespace pafa::meta {

std::vector<Violation> check_constraints(const ModelStore& store, const std::vector<Constraint>& constraints) {
  std::vector<Violation> out;
  for (std::size_t c = 0; c < constraints.size(); ++c) {
    const auto& con = constraints[c];
    query::Predicate pred;
    try {
      pred = query::parse_predicate(con.predicate);
      store.get_class(con.scope);
    } catch (const Error& e) {
      out.push_back({c, con.name, 0, Violation::Type::EvalError, e.what()});
      continue;
    }
    for (auto id : store.instances_of(con.scope)) {
      try {
        if (!query::eval_predicate(pred, store, id)) {
          out.push_back({c, con.name, id, Violation::Type::Failed, query::render(pred)});
        }
      } catch (const Error& e) {
        out.push_back({c, con.name, id, Violation::Type::EvalError, e.what()});
      }
    }
  }
  return out;
}

}  // namespace pafa::meta
