#pragma once

// Umbrella header.

#include "sp/core.hpp"
#include "sp/matcher.hpp"
#include "sp/score.hpp"
#include "sp/builder.hpp"
#include "sp/learn.hpp"
#include "sp/io.hpp"
#include "sp/render.hpp"
#include "sp/export.hpp"
