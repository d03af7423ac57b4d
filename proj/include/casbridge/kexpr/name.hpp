#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace casbridge::kexpr {

/// Hierarchical name such as `real.has_add` or the generated unique name `17.27`.
/// Segments are either text or natural numbers.
class Name {
  public:
    using Segment = std::variant<std::string, std::uint64_t>;

    Name() = default;
    explicit Name(std::vector<Segment> segments);
    Name(std::initializer_list<Segment> segments);
    Name(const char* text) : Name(parse(text)) {}
    Name(const std::string& text) : Name(parse(text)) {}

    /// Splits on `.`; all-digit segments become numbers, «...» quotes a text segment.
    static Name parse(std::string_view text);

    const std::vector<Segment>& segments() const { return segments_; }
    bool empty() const { return segments_.empty(); }

    Name append(Segment s) const;
    Name prefix() const;
    std::string last_text() const;

    std::string to_string() const;

    friend bool operator==(const Name&, const Name&) = default;
    friend std::strong_ordering operator<=>(const Name& a, const Name& b);

  private:
    std::vector<Segment> segments_;
};

class NameError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace casbridge::kexpr
