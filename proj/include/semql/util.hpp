#pragma once

// Small shared helpers: a deep-copying box for recursive value types and
// the string utilities used across schema loading, linking and printing.

#include <algorithm>
#include <cctype>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semql {

/// Heap-allocated value wrapper so recursive structs keep value semantics.
/// Copying a box deep-copies the payload.
template <class T>
class box {
public:
    box() : ptr_(std::make_unique<T>()) {}
    box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
    box(const box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
    box(box&&) noexcept = default;
    box& operator=(const box& other) {
        if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
        return *this;
    }
    box& operator=(box&&) noexcept = default;

    T& operator*() { return *ptr_; }
    const T& operator*() const { return *ptr_; }
    T* operator->() { return ptr_.get(); }
    const T* operator->() const { return ptr_.get(); }

    friend bool operator==(const box& a, const box& b) { return *a.ptr_ == *b.ptr_; }

private:
    std::unique_ptr<T> ptr_;
};

inline std::string to_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Case-insensitive equality for identifiers.
inline bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) return false;
    }
    return true;
}

/// Splits an identifier on underscores and whitespace into lower-cased tokens.
inline std::vector<std::string> tokenize_name(std::string_view name) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : name) {
        if (ch == '_' || std::isspace(static_cast<unsigned char>(ch))) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace semql
