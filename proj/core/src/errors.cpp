#include "covgrad/errors.hpp"

namespace covgrad {

SaddleError::SaddleError(const std::string& what, double min_eigenvalue, double max_eigenvalue)
    : Error(what), min_eigenvalue_(min_eigenvalue), max_eigenvalue_(max_eigenvalue) {}

DivergenceError::DivergenceError(std::size_t step, const std::string& what)
    : Error("step " + std::to_string(step) + ": " + what), step_(step) {}

ConvergenceError::ConvergenceError(const std::string& what, double gradient_norm)
    : Error(what), gradient_norm_(gradient_norm) {}

}  // namespace covgrad
