#pragma once

#include "goddard/dynamics.hpp"
#include "goddard/grids.hpp"
#include "goddard/butcher.hpp"
#include "goddard/steppers.hpp"
#include "goddard/influence_diagram.hpp"
#include "goddard/rollout.hpp"
#include "goddard/cli_io.hpp"
