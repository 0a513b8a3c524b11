#pragma once

#include "convdetect/bits.hpp"
#include "convdetect/channel.hpp"
#include "convdetect/codes.hpp"
#include "convdetect/detector.hpp"
#include "convdetect/exponent.hpp"
#include "convdetect/harness.hpp"
#include "convdetect/markov.hpp"
