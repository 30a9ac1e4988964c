#pragma once

#include <array>
#include <string_view>

namespace opcascade {

inline constexpr std::size_t kLexiconDims = 8;
inline constexpr std::array<std::string_view, kLexiconDims> kEmotionNames = {
    "anger", "anticipation", "disgust", "fear", "joy", "sadness", "surprise", "trust"};

struct LexiconEntry {
    std::string_view word;
    std::array<double, kLexiconDims> emotion;  // anger antic disgust fear joy sad surprise trust
};

// Small hand-built crisis-communication lexicon. Intensities are signed and in [-1,1].
inline constexpr LexiconEntry kLexicon[] = {
    {"angry", {0.9, 0.0, 0.3, 0.1, -0.6, 0.1, 0.0, -0.4}},
    {"anger", {0.9, 0.0, 0.3, 0.1, -0.6, 0.1, 0.0, -0.4}},
    {"outrage", {1.0, 0.1, 0.6, 0.1, -0.7, 0.1, 0.3, -0.6}},
    {"outraged", {1.0, 0.1, 0.6, 0.1, -0.7, 0.1, 0.3, -0.6}},
    {"furious", {1.0, 0.0, 0.4, 0.0, -0.8, 0.0, 0.1, -0.5}},
    {"boycott", {0.8, 0.4, 0.6, 0.0, -0.5, 0.1, 0.0, -0.8}},
    {"scandal", {0.6, 0.2, 0.7, 0.3, -0.5, 0.2, 0.6, -0.8}},
    {"lie", {0.7, 0.0, 0.6, 0.2, -0.4, 0.2, 0.1, -0.9}},
    {"lies", {0.7, 0.0, 0.6, 0.2, -0.4, 0.2, 0.1, -0.9}},
    {"lied", {0.7, 0.0, 0.6, 0.2, -0.4, 0.2, 0.1, -0.9}},
    {"cover", {0.3, 0.1, 0.3, 0.2, -0.2, 0.0, 0.1, -0.4}},
    {"coverup", {0.8, 0.1, 0.7, 0.2, -0.5, 0.1, 0.2, -0.9}},
    {"fraud", {0.8, 0.0, 0.8, 0.3, -0.6, 0.2, 0.3, -1.0}},
    {"disgusting", {0.6, 0.0, 1.0, 0.1, -0.6, 0.2, 0.1, -0.6}},
    {"shameful", {0.6, 0.0, 0.8, 0.0, -0.5, 0.4, 0.0, -0.6}},
    {"shame", {0.5, 0.0, 0.7, 0.1, -0.5, 0.5, 0.0, -0.5}},
    {"toxic", {0.5, 0.0, 0.9, 0.5, -0.5, 0.1, 0.0, -0.6}},
    {"contaminated", {0.4, 0.1, 0.9, 0.8, -0.5, 0.2, 0.3, -0.6}},
    {"unsafe", {0.3, 0.3, 0.4, 0.9, -0.5, 0.2, 0.1, -0.6}},
    {"danger", {0.2, 0.5, 0.2, 1.0, -0.5, 0.1, 0.3, -0.4}},
    {"dangerous", {0.2, 0.5, 0.2, 1.0, -0.5, 0.1, 0.3, -0.4}},
    {"risk", {0.1, 0.5, 0.1, 0.7, -0.3, 0.1, 0.1, -0.3}},
    {"afraid", {0.0, 0.4, 0.0, 1.0, -0.5, 0.3, 0.1, -0.3}},
    {"scared", {0.0, 0.4, 0.0, 1.0, -0.5, 0.3, 0.2, -0.3}},
    {"worried", {0.1, 0.6, 0.0, 0.8, -0.4, 0.3, 0.0, -0.2}},
    {"panic", {0.2, 0.5, 0.0, 1.0, -0.6, 0.2, 0.5, -0.4}},
    {"recall", {0.2, 0.5, 0.2, 0.6, -0.2, 0.2, 0.4, -0.2}},
    {"injured", {0.3, 0.1, 0.2, 0.7, -0.6, 0.8, 0.3, -0.2}},
    {"death", {0.3, 0.1, 0.1, 0.8, -0.8, 1.0, 0.3, -0.2}},
    {"victims", {0.4, 0.1, 0.2, 0.6, -0.7, 0.9, 0.2, -0.2}},
    {"sad", {0.0, 0.0, 0.0, 0.2, -0.7, 1.0, 0.0, 0.0}},
    {"heartbreaking", {0.1, 0.0, 0.0, 0.2, -0.7, 1.0, 0.2, 0.0}},
    {"disappointed", {0.4, 0.0, 0.2, 0.0, -0.6, 0.8, 0.1, -0.4}},
    {"disappointing", {0.4, 0.0, 0.2, 0.0, -0.6, 0.8, 0.1, -0.4}},
    {"betrayed", {0.7, 0.0, 0.5, 0.1, -0.6, 0.7, 0.4, -1.0}},
    {"shocked", {0.3, 0.1, 0.2, 0.4, -0.3, 0.2, 1.0, -0.2}},
    {"shocking", {0.3, 0.1, 0.3, 0.4, -0.3, 0.2, 1.0, -0.3}},
    {"unbelievable", {0.3, 0.0, 0.2, 0.1, -0.1, 0.0, 0.9, -0.3}},
    {"unexpected", {0.0, 0.2, 0.0, 0.2, 0.0, 0.0, 0.9, 0.0}},
    {"sudden", {0.0, 0.2, 0.0, 0.3, 0.0, 0.0, 0.8, 0.0}},
    {"leak", {0.3, 0.3, 0.3, 0.5, -0.3, 0.1, 0.6, -0.5}},
    {"leaked", {0.3, 0.3, 0.3, 0.5, -0.3, 0.1, 0.6, -0.5}},
    {"breach", {0.4, 0.3, 0.3, 0.7, -0.4, 0.1, 0.5, -0.7}},
    {"hacked", {0.4, 0.2, 0.3, 0.8, -0.4, 0.2, 0.6, -0.6}},
    {"waiting", {0.1, 0.8, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0}},
    {"expect", {0.0, 0.8, 0.0, 0.0, 0.1, 0.0, 0.0, 0.1}},
    {"soon", {0.0, 0.7, 0.0, 0.0, 0.1, 0.0, 0.0, 0.0}},
    {"investigation", {0.1, 0.7, 0.1, 0.3, -0.1, 0.0, 0.1, 0.1}},
    {"investigate", {0.1, 0.7, 0.1, 0.3, -0.1, 0.0, 0.1, 0.1}},
    {"update", {0.0, 0.6, 0.0, 0.0, 0.1, 0.0, 0.0, 0.2}},
    {"plan", {0.0, 0.7, 0.0, 0.0, 0.2, 0.0, 0.0, 0.3}},
    {"apologize", {-0.3, 0.2, -0.1, 0.0, 0.1, 0.3, 0.0, 0.5}},
    {"apology", {-0.3, 0.2, -0.1, 0.0, 0.1, 0.3, 0.0, 0.5}},
    {"sorry", {-0.3, 0.1, 0.0, 0.0, 0.0, 0.5, 0.0, 0.4}},
    {"responsibility", {-0.2, 0.3, -0.1, -0.1, 0.2, 0.0, 0.0, 0.7}},
    {"accountable", {-0.2, 0.3, -0.1, -0.1, 0.2, 0.0, 0.0, 0.7}},
    {"transparent", {-0.3, 0.3, -0.2, -0.3, 0.3, 0.0, 0.0, 0.8}},
    {"transparency", {-0.3, 0.3, -0.2, -0.3, 0.3, 0.0, 0.0, 0.8}},
    {"refund", {-0.4, 0.4, -0.1, -0.3, 0.6, 0.0, 0.1, 0.6}},
    {"compensation", {-0.4, 0.4, -0.1, -0.3, 0.5, 0.0, 0.0, 0.6}},
    {"fix", {-0.2, 0.5, 0.0, -0.3, 0.4, 0.0, 0.0, 0.5}},
    {"fixed", {-0.3, 0.2, 0.0, -0.4, 0.6, 0.0, 0.0, 0.6}},
    {"safe", {-0.3, 0.1, -0.2, -0.8, 0.6, 0.0, 0.0, 0.7}},
    {"safety", {-0.1, 0.3, -0.1, -0.4, 0.3, 0.0, 0.0, 0.6}},
    {"trust", {-0.3, 0.1, -0.3, -0.3, 0.5, 0.0, 0.0, 1.0}},
    {"trusted", {-0.3, 0.1, -0.3, -0.3, 0.5, 0.0, 0.0, 1.0}},
    {"reliable", {-0.2, 0.0, -0.2, -0.3, 0.4, 0.0, 0.0, 0.9}},
    {"honest", {-0.3, 0.0, -0.4, -0.2, 0.5, 0.0, 0.0, 1.0}},
    {"support", {-0.2, 0.2, -0.2, -0.2, 0.5, 0.0, 0.0, 0.7}},
    {"thank", {-0.4, 0.0, -0.2, -0.2, 0.8, 0.0, 0.1, 0.6}},
    {"thanks", {-0.4, 0.0, -0.2, -0.2, 0.8, 0.0, 0.1, 0.6}},
    {"happy", {-0.5, 0.2, -0.3, -0.3, 1.0, -0.5, 0.1, 0.4}},
    {"great", {-0.4, 0.2, -0.3, -0.2, 0.9, -0.4, 0.1, 0.4}},
    {"love", {-0.5, 0.2, -0.4, -0.2, 1.0, -0.3, 0.0, 0.7}},
    {"relieved", {-0.4, 0.0, -0.2, -0.6, 0.8, -0.3, 0.0, 0.4}},
    {"calm", {-0.6, 0.0, -0.2, -0.6, 0.4, -0.1, -0.3, 0.4}},
    {"resolved", {-0.5, 0.0, -0.2, -0.5, 0.6, -0.2, 0.0, 0.6}},
    {"ignore", {0.4, 0.0, 0.3, 0.0, -0.3, 0.2, 0.0, -0.5}},
    {"ignored", {0.5, 0.0, 0.3, 0.0, -0.4, 0.3, 0.0, -0.6}},
    {"silence", {0.4, 0.3, 0.2, 0.3, -0.3, 0.2, 0.1, -0.5}},
    {"denied", {0.5, 0.0, 0.4, 0.1, -0.3, 0.1, 0.3, -0.7}},
    {"deny", {0.5, 0.0, 0.4, 0.1, -0.3, 0.1, 0.2, -0.7}},
    {"excuse", {0.5, 0.0, 0.5, 0.0, -0.3, 0.1, 0.0, -0.6}},
    {"greedy", {0.7, 0.0, 0.8, 0.0, -0.5, 0.1, 0.0, -0.8}},
    {"arrogant", {0.7, 0.0, 0.7, 0.0, -0.4, 0.0, 0.1, -0.7}},
    {"fired", {0.3, 0.3, 0.1, 0.3, 0.0, 0.3, 0.6, -0.1}},
    {"lawsuit", {0.5, 0.5, 0.3, 0.5, -0.3, 0.1, 0.3, -0.5}},
    {"fine", {0.1, 0.2, 0.0, 0.1, 0.0, 0.0, 0.1, 0.0}},
    {"viral", {0.1, 0.5, 0.0, 0.1, 0.2, 0.0, 0.7, 0.0}},
};

}  // namespace opcascade
