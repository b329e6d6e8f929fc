/*
 * Copyright (C) 2026 The flowlab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace flowlab {

// Invalid construction parameters (ranges, sizes, step lengths).
class ParameterError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Request exceeds what the chosen method can handle (e.g. 2^N enumeration).
class CapacityError : public std::length_error {
  public:
    using std::length_error::length_error;
};

// Time step too coarse for the oscillation frequency being simulated.
class ResolutionError : public std::runtime_error {
  public:
    ResolutionError(const std::string& what, double required_dt)
        : std::runtime_error(what), required_dt_(required_dt) {}
    double required_dt() const noexcept { return required_dt_; }

  private:
    double required_dt_;
};

// No admissible parameter on the search grid.
class InfeasibleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Malformed or unknown configuration input.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace flowlab
