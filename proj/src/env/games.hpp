#pragma once

#include <memory>

#include "readward/env.hpp"

namespace readward::env {

std::unique_ptr<Env> make_dot_maze(const EnvConfig& config);
std::unique_ptr<Env> make_brick_wall(const EnvConfig& config);
std::unique_ptr<Env> make_ski_run(const EnvConfig& config);

}  // namespace readward::env
