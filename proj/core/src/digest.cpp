#include "ministl/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

#include "ministl/common.hpp"

namespace ministl {

Sha256::Sha256() {
    auto* ctx = EVP_MD_CTX_new();
    MINISTL_CHECK(ctx != nullptr, Error, "EVP_MD_CTX_new failed");
    if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("EVP_DigestInit_ex failed");
    }
    ctx_ = ctx;
}

Sha256::~Sha256() {
    if (ctx_ != nullptr) {
        EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
    }
}

void Sha256::update(const void* data, std::size_t len) {
    MINISTL_CHECK(ctx_ != nullptr, Error, "Sha256 used after hex()");
    MINISTL_CHECK(EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data, len) == 1, Error,
                  "EVP_DigestUpdate failed");
}

std::string Sha256::hex() {
    MINISTL_CHECK(ctx_ != nullptr, Error, "Sha256 used after hex()");
    std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
    unsigned int out_len = 0;
    MINISTL_CHECK(EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &out_len) == 1,
                  Error, "EVP_DigestFinal_ex failed");
    EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
    ctx_ = nullptr;

    std::string hexed(out_len * 2, '0');
    static const char* digits = "0123456789abcdef";
    for (unsigned int i = 0; i < out_len; ++i) {
        hexed[2 * i] = digits[out[i] >> 4];
        hexed[2 * i + 1] = digits[out[i] & 0xF];
    }
    return hexed;
}

std::string sha256_hex(const void* data, std::size_t len) {
    Sha256 h;
    h.update(data, len);
    return h.hex();
}

std::string sha256_hex(const std::string& s) {
    return sha256_hex(s.data(), s.size());
}

}  // namespace ministl
