#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace pafa {

using Digest = std::array<std::uint8_t, 32>;

// SHA-256 of a byte stream.
Digest sha256(std::string_view bytes);

std::string to_hex(const Digest& digest);
Digest digest_from_hex(std::string_view hex);

// Incremental hashing for streams that are too large to buffer (event logs).
class Sha256Stream {
 public:
  Sha256Stream();
  ~Sha256Stream();
  Sha256Stream(const Sha256Stream&) = delete;
  Sha256Stream& operator=(const Sha256Stream&) = delete;

  void update(std::string_view bytes);
  Digest finish();

 private:
  void* ctx_;
};

// Shortest decimal text that round-trips to the same double.
std::string format_real(double value);

}  // namespace pafa
