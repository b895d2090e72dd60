#pragma once

// Minimal reflective object store. The consciousness of a module is an
// instance of this store populated with the OAAM-lite classes.
//
// Meta-level vocabulary is deliberately tiny: MetaClass (attributes +
// references), ModelObject, ModelStore and Constraint. No inheritance, no
// opposite references, no change notification.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pafa/digest.hpp"
#include "pafa/error.hpp"

namespace pafa::meta {

enum class Kind { Int, Real, Text, Bool, EnumRef };
enum class Multiplicity { One, Many };

const char* to_string(Kind kind);

using ObjectId = std::uint64_t;

struct ObjectRef {
  ObjectId id = 0;
  friend bool operator==(const ObjectRef&, const ObjectRef&) = default;
};

struct EnumLiteral {
  std::string literal;
  friend bool operator==(const EnumLiteral&, const EnumLiteral&) = default;
};

using Value = std::variant<std::int64_t, double, std::string, bool, EnumLiteral, ObjectRef>;

struct AttributeDef {
  std::string name;
  Kind kind = Kind::Int;
  Multiplicity multiplicity = Multiplicity::One;
  // Allowed literals when kind == EnumRef; the first one is the default.
  std::vector<std::string> literals{};
};

struct ReferenceDef {
  std::string name;
  std::string target;
  Multiplicity multiplicity = Multiplicity::One;
  bool containment = false;
};

struct MetaClass {
  std::string name;
  std::vector<AttributeDef> attributes;
  std::vector<ReferenceDef> references;

  const AttributeDef* attribute(std::string_view member) const;
  const ReferenceDef* reference(std::string_view member) const;
  bool has_member(std::string_view member) const {
    return attribute(member) != nullptr || reference(member) != nullptr;
  }
  // Slot index in declaration order: attributes first, then references.
  std::optional<std::size_t> slot_index(std::string_view member) const;
  std::size_t slot_count() const { return attributes.size() + references.size(); }
};

struct ModelObject {
  ObjectId id = 0;
  const MetaClass* cls = nullptr;
  std::vector<std::vector<Value>> slots;  // indexed by MetaClass::slot_index
};

class ModelStore {
 public:
  ModelStore() = default;
  ModelStore(const ModelStore& other);
  ModelStore& operator=(const ModelStore& other);
  ModelStore(ModelStore&&) noexcept = default;
  ModelStore& operator=(ModelStore&&) noexcept = default;

  const MetaClass& define_class(std::string name, std::vector<AttributeDef> attributes,
                                std::vector<ReferenceDef> references);
  const MetaClass* find_class(std::string_view name) const;
  const MetaClass& get_class(std::string_view name) const;
  const std::deque<MetaClass>& classes() const { return classes_; }

  ObjectId instantiate(std::string_view class_name);
  // Rejects classes registered in another store.
  ObjectId instantiate(const MetaClass& cls);

  // Removes the object together with everything it contains and scrubs
  // references to the removed objects from the rest of the store.
  void remove(ObjectId id);

  bool contains(ObjectId id) const { return objects_.count(id) != 0; }
  const ModelObject& object(ObjectId id) const;
  const MetaClass& class_of(ObjectId id) const { return *object(id).cls; }

  // Iteration in ascending id order.
  const std::map<ObjectId, ModelObject>& objects() const { return objects_; }
  std::vector<ObjectId> instances_of(std::string_view class_name) const;
  std::size_t size() const { return objects_.size(); }

  // Replaces the slot content. For `one` attributes exactly one value is required;
  // for `one` references at most one.
  void write(ObjectId id, std::string_view member, Value value);
  void write_many(ObjectId id, std::string_view member, std::vector<Value> values);
  void append(ObjectId id, std::string_view member, Value value);
  const std::vector<Value>& read(ObjectId id, std::string_view member) const;

  std::int64_t get_int(ObjectId id, std::string_view member) const;
  double get_real(ObjectId id, std::string_view member) const;
  const std::string& get_text(ObjectId id, std::string_view member) const;
  bool get_bool(ObjectId id, std::string_view member) const;
  const std::string& get_enum(ObjectId id, std::string_view member) const;
  std::optional<ObjectId> get_ref(ObjectId id, std::string_view member) const;
  std::vector<ObjectId> get_refs(ObjectId id, std::string_view member) const;

  // Container of `id` through a containment reference, if any.
  std::optional<ObjectId> container_of(ObjectId id) const;

  ModelStore snapshot() const { return *this; }
  std::uint64_t version() const { return version_; }
  ObjectId next_id() const { return next_id_; }

  std::string canonical_serialization() const;
  Digest digest() const { return sha256(canonical_serialization()); }

 private:
  ModelObject& mutable_object(ObjectId id);
  void check_value(const ModelObject& obj, std::size_t slot, const Value& value) const;
  void check_containment(ObjectId owner, std::size_t slot, const std::vector<Value>& values) const;
  void rebind_classes();

  std::deque<MetaClass> classes_;
  std::map<std::string, std::size_t, std::less<>> class_index_;
  std::map<ObjectId, ModelObject> objects_;
  ObjectId next_id_ = 1;
  std::uint64_t version_ = 0;
};

// A predicate (query-language comparison) that must hold for every instance
// of `scope`.
struct Constraint {
  std::string name;
  std::string scope;
  std::string predicate;
};

struct Violation {
  enum class Type { Failed, EvalError };
  std::size_t constraint_index = 0;
  std::string constraint;
  ObjectId object = 0;
  Type type = Type::Failed;
  std::string detail;
};

std::vector<Violation> check_constraints(const ModelStore& store,
                                         const std::vector<Constraint>& constraints);

std::string render_value(const Value& value);

}  // namespace pafa::meta
