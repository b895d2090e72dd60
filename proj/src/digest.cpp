#include "pafa/digest.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <stdexcept>

#include "pafa/error.hpp"

namespace pafa {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DuplicateClass: return "DuplicateClass";
    case ErrorKind::UnknownTargetClass: return "UnknownTargetClass";
    case ErrorKind::DuplicateMember: return "DuplicateMember";
    case ErrorKind::UnknownClass: return "UnknownClass";
    case ErrorKind::UnknownMember: return "UnknownMember";
    case ErrorKind::UnknownObject: return "UnknownObject";
    case ErrorKind::KindMismatch: return "KindMismatch";
    case ErrorKind::MultiplicityViolation: return "MultiplicityViolation";
    case ErrorKind::ContainmentCycle: return "ContainmentCycle";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::DuplicateName: return "DuplicateName";
    case ErrorKind::UnknownElement: return "UnknownElement";
    case ErrorKind::NoFiniteK: return "NoFiniteK";
    case ErrorKind::CutSetExplosion: return "CutSetExplosion";
    case ErrorKind::MalformedTable: return "MalformedTable";
    case ErrorKind::PastCycle: return "PastCycle";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Digest sha256(std::string_view bytes) {
  Sha256Stream stream;
  stream.update(bytes);
  return stream.finish();
}

Sha256Stream::Sha256Stream() : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: cannot initialise digest context");
  }
}

Sha256Stream::~Sha256Stream() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

void Sha256Stream::update(std::string_view bytes) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), bytes.data(), bytes.size());
}

Digest Sha256Stream::finish() {
  Digest out{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &len);
  return out;
}

std::string to_hex(const Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (auto byte : digest) {
    out.push_back(kHex[byte >> 4]);
    out.push_back(kHex[byte & 0xF]);
  }
  return out;
}

Digest digest_from_hex(std::string_view hex) {
  if (hex.size() != 64) throw Error(ErrorKind::ParseError, "digest must be 64 hex characters");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error(ErrorKind::ParseError, "bad hex digit in digest");
  };
  Digest out{};
  for (std::size_t i = 0; i < 32; ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

std::string format_real(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace pafa
