// Umbrella header.
#pragma once

#include "evpart/corpus.hpp"
#include "evpart/criterion.hpp"
#include "evpart/errors.hpp"
#include "evpart/evidence.hpp"
#include "evpart/frame.hpp"
#include "evpart/optimizer.hpp"
#include "evpart/oracle.hpp"
#include "evpart/report.hpp"
