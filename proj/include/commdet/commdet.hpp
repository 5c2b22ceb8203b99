#pragma once

#include "commdet/assignment.hpp"
#include "commdet/bounds.hpp"
#include "commdet/confusion.hpp"
#include "commdet/experiments.hpp"
#include "commdet/io.hpp"
#include "commdet/linalg.hpp"
#include "commdet/mle.hpp"
#include "commdet/model.hpp"
#include "commdet/rng.hpp"
#include "commdet/theta.hpp"
#include "commdet/vertexsum.hpp"
