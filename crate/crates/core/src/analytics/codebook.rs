use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

macro_rules! label_enum {
    ($name:ident { $($variant:ident => $text:literal,)* }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub enum $name {
            $($variant,)*
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant,)*];

            /// The codebook category text.
            pub fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $text,)*
                }
            }
        }

        impl FromStr for $name {
            type Err = String;

            /// Matches case-insensitively after collapsing whitespace.
            fn from_str(s: &str) -> Result<Self, String> {
                let norm = s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
                Self::ALL
                    .iter()
                    .copied()
                    .find(|l| l.label().to_lowercase() == norm)
                    .ok_or_else(|| format!("`{s}` is not a known {} label", stringify!($name)))
            }
        }

        impl TryFrom<String> for $name {
            type Error = String;
            fn try_from(s: String) -> Result<Self, String> {
                s.parse()
            }
        }

        impl From<$name> for String {
            fn from(l: $name) -> String {
                l.label().to_owned()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }
    };
}

label_enum!(ActionLabel {
    DirectIdeaGeneration => "direct idea generation using ChatGPT or search",
    AddOwnIdea => "add users own idea",
    AnalyzeTradeoffAssisted => "analyze tradeoff using ChatGPT or search",
    AnalyzeTradeoffSelf => "analyze tradeoff themselves",
    FindSolutionAssisted => "find solution to certain tradeoff using ChatGPT or search",
    FindSolutionSelf => "find solution to certain tradeoff themselves",
    FindSimilarAssisted => "find similar idea using ChatGPT or search",
    FindSimilarSelf => "find similar idea themselves",
    AskQuestion => "ask question",
    Other => "other",
});

label_enum!(InfoLabel {
    Ideas => "ideas",
    Tradeoffs => "tradeoffs",
    OtherKnowledge => "other knowledge",
});
