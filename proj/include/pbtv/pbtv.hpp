#pragma once

#include "pbtv/error.hpp"
#include "pbtv/core.hpp"
#include "pbtv/bounds.hpp"
#include "pbtv/oracle.hpp"
#include "pbtv/homog.hpp"
#include "pbtv/harness.hpp"
