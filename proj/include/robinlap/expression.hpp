#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace robinlap {

/// Real-valued closed-form expression of a boundary point x.
///
/// Grammar (usual precedence, ^ right associative, unary minus binds looser
/// than ^):
///   numbers, pi, e
///   x1, x2        coordinates; x alone means x1 when the boundary is 1-D
///   r or |x|      Euclidean norm of the point
///   |expr|        absolute value
///   + - * / ^
///   abs sqrt exp log sin cos tan sign (one argument), min max pow (two)
///   ball(rho)     indicator of |x| <= rho
///   box(a)        indicator of max_i |x_i| <= a
///   step(t)       indicator of t >= 0
class Expression {
public:
    /// Throws config-invalid with the offending position.
    static Expression parse(std::string_view text);

    double operator()(std::span<const double> x) const;
    const std::string& text() const noexcept { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

} // namespace robinlap
