#include "pafa/metamodel.hpp"

#include <algorithm>
#include <set>

namespace pafa::meta {

const char* to_string(Kind kind) {
  switch (kind) {
    case Kind::Int: return "Int";
    case Kind::Real: return "Real";
    case Kind::Text: return "Text";
    case Kind::Bool: return "Bool";
    case Kind::EnumRef: return "EnumRef";
  }
  return "?";
}

const AttributeDef* MetaClass::attribute(std::string_view member) const {
  for (const auto& a : attributes) {
    if (a.name == member) return &a;
  }
  return nullptr;
}

const ReferenceDef* MetaClass::reference(std::string_view member) const {
  for (const auto& r : references) {
    if (r.name == member) return &r;
  }
  return nullptr;
}

std::optional<std::size_t> MetaClass::slot_index(std::string_view member) const {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i].name == member) return i;
  }
  for (std::size_t i = 0; i < references.size(); ++i) {
    if (references[i].name == member) return attributes.size() + i;
  }
  return std::nullopt;
}

ModelStore::ModelStore(const ModelStore& other)
    : classes_(other.classes_),
      class_index_(other.class_index_),
      objects_(other.objects_),
      next_id_(other.next_id_),
      version_(other.version_) {
  rebind_classes();
}

ModelStore& ModelStore::operator=(const ModelStore& other) {
  if (this != &other) {
    ModelStore copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void ModelStore::rebind_classes() {
  for (auto& [id, obj] : objects_) {
    obj.cls = &classes_[class_index_.find(obj.cls->name)->second];
  }
}

const MetaClass& ModelStore::define_class(std::string name, std::vector<AttributeDef> attributes,
                                          std::vector<ReferenceDef> references) {
  if (class_index_.count(name) != 0) throw Error(ErrorKind::DuplicateClass, name);
  std::set<std::string> members;
  for (const auto& a : attributes) {
    if (!members.insert(a.name).second) throw Error(ErrorKind::DuplicateMember, name + "." + a.name);
    if (a.kind == Kind::EnumRef && a.literals.empty()) {
      throw Error(ErrorKind::InvalidArgument, name + "." + a.name + ": enum without literals");
    }
  }
  for (const auto& r : references) {
    if (!members.insert(r.name).second) throw Error(ErrorKind::DuplicateMember, name + "." + r.name);
    if (r.target != name && class_index_.count(r.target) == 0) {
      throw Error(ErrorKind::UnknownTargetClass, name + "." + r.name + " -> " + r.target);
    }
  }
  classes_.push_back(MetaClass{std::move(name), std::move(attributes), std::move(references)});
  class_index_.emplace(classes_.back().name, classes_.size() - 1);
  ++version_;
  return classes_.back();
}

const MetaClass* ModelStore::find_class(std::string_view name) const {
  auto it = class_index_.find(name);
  return it == class_index_.end() ? nullptr : &classes_[it->second];
}

const MetaClass& ModelStore::get_class(std::string_view name) const {
  const auto* cls = find_class(name);
  if (cls == nullptr) throw Error(ErrorKind::UnknownClass, std::string(name));
  return *cls;
}

namespace {

Value default_value(const AttributeDef& def) {
  switch (def.kind) {
    case Kind::Int: return std::int64_t{0};
    case Kind::Real: return 0.0;
    case Kind::Text: return std::string{};
    case Kind::Bool: return false;
    case Kind::EnumRef: return EnumLiteral{def.literals.front()};
  }
  return std::int64_t{0};
}

}  // namespace

ObjectId ModelStore::instantiate(std::string_view class_name) {
  return instantiate(get_class(class_name));
}

ObjectId ModelStore::instantiate(const MetaClass& cls) {
  const auto* own = find_class(cls.name);
  if (own != &cls) throw Error(ErrorKind::UnknownClass, cls.name + " is not registered in this store");
  ModelObject obj;
  obj.id = next_id_++;
  obj.cls = own;
  obj.slots.resize(own->slot_count());
  for (std::size_t i = 0; i < own->attributes.size(); ++i) {
    if (own->attributes[i].multiplicity == Multiplicity::One) {
      obj.slots[i].push_back(default_value(own->attributes[i]));
    }
  }
  auto id = obj.id;
  objects_.emplace(id, std::move(obj));
  ++version_;
  return id;
}

const ModelObject& ModelStore::object(ObjectId id) const {
  auto it = objects_.find(id);
  if (it == objects_.end()) throw Error(ErrorKind::UnknownObject, "#" + std::to_string(id));
  return it->second;
}

ModelObject& ModelStore::mutable_object(ObjectId id) {
  auto it = objects_.find(id);
  if (it == objects_.end()) throw Error(ErrorKind::UnknownObject, "#" + std::to_string(id));
  return it->second;
}

std::vector<ObjectId> ModelStore::instances_of(std::string_view class_name) const {
  const auto* cls = find_class(class_name);
  std::vector<ObjectId> out;
  if (cls == nullptr) return out;
  for (const auto& [id, obj] : objects_) {
    if (obj.cls == cls) out.push_back(id);
  }
  return out;
}

void ModelStore::check_value(const ModelObject& obj, std::size_t slot, const Value& value) const {
  const auto& cls = *obj.cls;
  if (slot < cls.attributes.size()) {
    const auto& def = cls.attributes[slot];
    bool ok = false;
    switch (def.kind) {
      case Kind::Int: ok = std::holds_alternative<std::int64_t>(value); break;
      case Kind::Real: ok = std::holds_alternative<double>(value); break;
      case Kind::Text: ok = std::holds_alternative<std::string>(value); break;
      case Kind::Bool: ok = std::holds_alternative<bool>(value); break;
      case Kind::EnumRef:
        if (const auto* lit = std::get_if<EnumLiteral>(&value)) {
          ok = std::find(def.literals.begin(), def.literals.end(), lit->literal) != def.literals.end();
        }
        break;
    }
    if (!ok) {
      throw Error(ErrorKind::KindMismatch,
                  cls.name + "." + def.name + " expects " + to_string(def.kind));
    }
    return;
  }
  const auto& def = cls.references[slot - cls.attributes.size()];
  const auto* ref = std::get_if<ObjectRef>(&value);
  if (ref == nullptr) throw Error(ErrorKind::KindMismatch, cls.name + "." + def.name + " expects a reference");
  auto it = objects_.find(ref->id);
  if (it == objects_.end()) throw Error(ErrorKind::UnknownObject, "#" + std::to_string(ref->id));
  if (it->second.cls->name != def.target) {
    throw Error(ErrorKind::KindMismatch,
                cls.name + "." + def.name + " expects " + def.target + ", got " + it->second.cls->name);
  }
}

std::optional<ObjectId> ModelStore::container_of(ObjectId id) const {
  for (const auto& [oid, obj] : objects_) {
    const auto& cls = *obj.cls;
    for (std::size_t r = 0; r < cls.references.size(); ++r) {
      if (!cls.references[r].containment) continue;
      for (const auto& v : obj.slots[cls.attributes.size() + r]) {
        if (std::get<ObjectRef>(v).id == id) return oid;
      }
    }
  }
  return std::nullopt;
}

void ModelStore::check_containment(ObjectId owner, std::size_t slot,
                                   const std::vector<Value>& values) const {
  const auto& cls = *object(owner).cls;
  if (slot < cls.attributes.size()) return;
  if (!cls.references[slot - cls.attributes.size()].containment) return;
  // Writing owner -> child closes a cycle iff owner is reachable from child
  // along containment edges (or child == owner).
  for (const auto& v : values) {
    std::vector<ObjectId> stack{std::get<ObjectRef>(v).id};
    std::set<ObjectId> seen;
    while (!stack.empty()) {
      auto cur = stack.back();
      stack.pop_back();
      if (cur == owner) {
        throw Error(ErrorKind::ContainmentCycle,
                    "#" + std::to_string(owner) + " cannot contain #" + std::to_string(std::get<ObjectRef>(v).id));
      }
      if (!seen.insert(cur).second) continue;
      const auto& obj = object(cur);
      const auto& ccls = *obj.cls;
      for (std::size_t r = 0; r < ccls.references.size(); ++r) {
        if (!ccls.references[r].containment) continue;
        for (const auto& cv : obj.slots[ccls.attributes.size() + r]) stack.push_back(std::get<ObjectRef>(cv).id);
      }
    }
  }
}

void ModelStore::write_many(ObjectId id, std::string_view member, std::vector<Value> values) {
  auto& obj = mutable_object(id);
  auto slot = obj.cls->slot_index(member);
  if (!slot) throw Error(ErrorKind::UnknownMember, obj.cls->name + "." + std::string(member));
  bool is_attr = *slot < obj.cls->attributes.size();
  auto mult = is_attr ? obj.cls->attributes[*slot].multiplicity
                      : obj.cls->references[*slot - obj.cls->attributes.size()].multiplicity;
  if (mult == Multiplicity::One) {
    std::size_t max = 1;
    std::size_t min = is_attr ? 1 : 0;
    if (values.size() < min || values.size() > max) {
      throw Error(ErrorKind::MultiplicityViolation,
                  obj.cls->name + "." + std::string(member) + " holds exactly one value");
    }
  }
  for (const auto& v : values) check_value(obj, *slot, v);
  check_containment(id, *slot, values);
  obj.slots[*slot] = std::move(values);
  ++version_;
}

void ModelStore::write(ObjectId id, std::string_view member, Value value) {
  const auto& obj = object(id);
  auto slot = obj.cls->slot_index(member);
  if (!slot) throw Error(ErrorKind::UnknownMember, obj.cls->name + "." + std::string(member));
  bool is_attr = *slot < obj.cls->attributes.size();
  auto mult = is_attr ? obj.cls->attributes[*slot].multiplicity
                      : obj.cls->references[*slot - obj.cls->attributes.size()].multiplicity;
  if (mult == Multiplicity::Many) {
    throw Error(ErrorKind::MultiplicityViolation,
                obj.cls->name + "." + std::string(member) + " is many-valued; use append/write_many");
  }
  write_many(id, member, std::vector<Value>{std::move(value)});
}

void ModelStore::append(ObjectId id, std::string_view member, Value value) {
  auto& obj = mutable_object(id);
  auto slot = obj.cls->slot_index(member);
  if (!slot) throw Error(ErrorKind::UnknownMember, obj.cls->name + "." + std::string(member));
  bool is_attr = *slot < obj.cls->attributes.size();
  auto mult = is_attr ? obj.cls->attributes[*slot].multiplicity
                      : obj.cls->references[*slot - obj.cls->attributes.size()].multiplicity;
  if (mult == Multiplicity::One) {
    if (!is_attr && obj.slots[*slot].empty()) {
      write_many(id, member, {std::move(value)});
      return;
    }
    throw Error(ErrorKind::MultiplicityViolation,
                obj.cls->name + "." + std::string(member) + " holds exactly one value");
  }
  check_value(obj, *slot, value);
  check_containment(id, *slot, {value});
  obj.slots[*slot].push_back(std::move(value));
  ++version_;
}

const std::vector<Value>& ModelStore::read(ObjectId id, std::string_view member) const {
  const auto& obj = object(id);
  auto slot = obj.cls->slot_index(member);
  if (!slot) throw Error(ErrorKind::UnknownMember, obj.cls->name + "." + std::string(member));
  return obj.slots[*slot];
}

namespace {

template <typename T>
const T& single(const std::vector<Value>& slot, std::string_view member) {
  if (slot.size() != 1) throw Error(ErrorKind::MultiplicityViolation, std::string(member) + " is unset");
  const auto* v = std::get_if<T>(&slot.front());
  if (v == nullptr) throw Error(ErrorKind::KindMismatch, std::string(member));
  return *v;
}

}  // namespace

std::int64_t ModelStore::get_int(ObjectId id, std::string_view member) const {
  return single<std::int64_t>(read(id, member), member);
}
double ModelStore::get_real(ObjectId id, std::string_view member) const {
  return single<double>(read(id, member), member);
}
const std::string& ModelStore::get_text(ObjectId id, std::string_view member) const {
  return single<std::string>(read(id, member), member);
}
bool ModelStore::get_bool(ObjectId id, std::string_view member) const {
  return single<bool>(read(id, member), member);
}
const std::string& ModelStore::get_enum(ObjectId id, std::string_view member) const {
  return single<EnumLiteral>(read(id, member), member).literal;
}

std::optional<ObjectId> ModelStore::get_ref(ObjectId id, std::string_view member) const {
  const auto& slot = read(id, member);
  if (slot.empty()) return std::nullopt;
  return std::get<ObjectRef>(slot.front()).id;
}

std::vector<ObjectId> ModelStore::get_refs(ObjectId id, std::string_view member) const {
  std::vector<ObjectId> out;
  for (const auto& v : read(id, member)) out.push_back(std::get<ObjectRef>(v).id);
  return out;
}

void ModelStore::remove(ObjectId id) {
  if (!contains(id)) throw Error(ErrorKind::UnknownObject, "#" + std::to_string(id));
  std::set<ObjectId> doomed;
  std::vector<ObjectId> stack{id};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    if (!doomed.insert(cur).second) continue;
    const auto& obj = object(cur);
    const auto& cls = *obj.cls;
    for (std::size_t r = 0; r < cls.references.size(); ++r) {
      if (!cls.references[r].containment) continue;
      for (const auto& v : obj.slots[cls.attributes.size() + r]) stack.push_back(std::get<ObjectRef>(v).id);
    }
  }
  for (auto d : doomed) objects_.erase(d);
  for (auto& [oid, obj] : objects_) {
    const auto& cls = *obj.cls;
    for (std::size_t r = 0; r < cls.references.size(); ++r) {
      auto& slot = obj.slots[cls.attributes.size() + r];
      std::erase_if(slot, [&](const Value& v) { return doomed.count(std::get<ObjectRef>(v).id) != 0; });
    }
  }
  ++version_;
}

namespace {

void append_escaped(std::string& out, std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  for (char c : text) {
    switch (c) {
      case '%': case '|': case ';': case ',': case '=': case '\n': case '\r':
        out.push_back('%');
        out.push_back(kHex[static_cast<unsigned char>(c) >> 4]);
        out.push_back(kHex[static_cast<unsigned char>(c) & 0xF]);
        break;
      default:
        out.push_back(c);
    }
  }
}

void append_value(std::string& out, const Value& value) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          out += std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          out += format_real(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          append_escaped(out, v);
        } else if constexpr (std::is_same_v<T, bool>) {
          out += v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, EnumLiteral>) {
          append_escaped(out, v.literal);
        } else {
          out += std::to_string(v.id);
        }
      },
      value);
}

}  // namespace

std::string render_value(const Value& value) {
  std::string out;
  append_value(out, value);
  return out;
}

std::string ModelStore::canonical_serialization() const {
  std::string out;
  for (const auto& [id, obj] : objects_) {
    const auto& cls = *obj.cls;
    out += std::to_string(id);
    out.push_back('|');
    append_escaped(out, cls.name);
    out.push_back('|');
    for (std::size_t s = 0; s < cls.slot_count(); ++s) {
      if (s != 0) out.push_back(';');
      const auto& name = s < cls.attributes.size() ? cls.attributes[s].name
                                                   : cls.references[s - cls.attributes.size()].name;
      out += name;
      out.push_back('=');
      bool first = true;
      for (const auto& v : obj.slots[s]) {
        if (!first) out.push_back(',');
        first = false;
        append_value(out, v);
      }
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace pafa::meta
