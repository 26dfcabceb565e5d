use serde::{Deserialize, Serialize};

use super::tokenize::words;

/// Contrast and aggregation marker lists. Multi-word markers are written
/// with spaces (`"as well"`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarkerConfig {
    pub contrast: Vec<String>,
    pub aggregation: Vec<String>,
}

impl Default for MarkerConfig {
    fn default() -> Self {
        let owned = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        MarkerConfig {
            contrast: owned(&["but", "although", "though", "however", "yet", "whereas", "while"]),
            aggregation: owned(&["both", "also", "too", "as well", "in addition"]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Discourse {
    pub contrast: bool,
    pub aggregation: bool,
}

fn contains_marker(toks: &[String], marker: &str) -> bool {
    let parts: Vec<String> = marker.split_whitespace().map(str::to_lowercase).collect();
    !parts.is_empty() && toks.windows(parts.len()).any(|w| w == parts.as_slice())
}

pub fn detect_discourse(text: &str, markers: &MarkerConfig) -> Discourse {
    let toks = words(text);
    Discourse {
        contrast: markers.contrast.iter().any(|m| contains_marker(&toks, m)),
        aggregation: markers.aggregation.iter().any(|m| contains_marker(&toks, m)),
    }
}
