#pragma once

#include "ecic/classic.hpp"
#include "ecic/extreme.hpp"
#include "ecic/io.hpp"
#include "ecic/sample.hpp"
#include "ecic/simulate.hpp"
#include "ecic/special.hpp"
#include "ecic/tail.hpp"
