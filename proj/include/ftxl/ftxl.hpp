#pragma once

#include "ftxl/congestion.hpp"
#include "ftxl/dynamics.hpp"
#include "ftxl/errors.hpp"
#include "ftxl/feedback.hpp"
#include "ftxl/fitting.hpp"
#include "ftxl/game.hpp"
#include "ftxl/harness.hpp"
#include "ftxl/learners.hpp"
#include "ftxl/player_vectors.hpp"
#include "ftxl/random.hpp"
#include "ftxl/regularizers.hpp"
