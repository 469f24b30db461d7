#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ministl {

/// Incremental SHA-256, hex-encoded on finish.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const void* data, std::size_t len);
    void update(const std::string& s) { update(s.data(), s.size()); }
    template <typename T>
    void update_vector(const std::vector<T>& v) {
        update(v.data(), v.size() * sizeof(T));
    }

    /// Hex digest; the object must not be reused afterwards.
    std::string hex();

private:
    void* ctx_ = nullptr;
};

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);

}  // namespace ministl
