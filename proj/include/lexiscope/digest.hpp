#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include <openssl/evp.h>

#include "lexiscope/corpus.hpp"
#include "lexiscope/error.hpp"

namespace lexiscope {

// SHA-256 of raw bytes; image identity for cross-lingual deduplication.
inline Digest sha256(std::span<const std::uint8_t> bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  Digest d{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), d.data(), &len) != 1 ||
      len != d.size()) {
    fail(ErrorCode::kIo, "SHA-256 failed");
  }
  return d;
}

}  // namespace lexiscope
