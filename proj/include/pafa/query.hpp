#pragma once

// Path query language over a ModelStore.
//
//   query     := "/" segment { "/" segment } [ "#" integer ] ;
//   segment   := name [ "[" predicate "]" ] ;
//   predicate := path op literal ;
//   path      := name { "." name }            (at most 3 names)
//   op        := "=" | "!=" | "<" | "<=" | ">" | ">=" ;
//   literal   := integer | real | quotedText | "true" | "false" ;
//
// The first segment names a class and yields its instances in id order; every
// further segment names a member of the current class and yields slot
// contents in slot order. The grammar has no recursion, so evaluation visits
// each object at most once per segment.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pafa/metamodel.hpp"

namespace pafa::query {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

const char* to_string(CompareOp op);

using Literal = std::variant<std::int64_t, double, std::string, bool>;

struct Predicate {
  std::vector<std::string> path;
  CompareOp op = CompareOp::Eq;
  Literal rhs;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct Segment {
  std::string name;
  std::optional<Predicate> predicate;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Query {
  std::vector<Segment> segments;
  std::optional<std::int64_t> index;

  friend bool operator==(const Query&, const Query&) = default;
};

inline constexpr std::size_t kMaxPathLength = 3;

Query parse_query(std::string_view text);
Predicate parse_predicate(std::string_view text);

std::string render(const Query& query);
std::string render(const Predicate& predicate);
std::string render(const Literal& literal);

// Results are object references (class/reference segments) or attribute
// values (a trailing attribute segment).
std::vector<meta::Value> eval_query(const Query& query, const meta::ModelStore& store);
inline std::vector<meta::Value> eval_query(std::string_view text, const meta::ModelStore& store) {
  return eval_query(parse_query(text), store);
}

// Convenience: object ids of a query whose result is a list of objects.
std::vector<meta::ObjectId> eval_objects(std::string_view text, const meta::ModelStore& store);

// Evaluates a predicate against one object of class `cls`; the predicate is
// type-checked against the schema first.
bool eval_predicate(const Predicate& predicate, const meta::ModelStore& store, meta::ObjectId object);

}  // namespace pafa::query
