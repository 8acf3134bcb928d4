//! The on-disk space format: a versioned JSON document holding either a
//! distance matrix or a dendrogram. The base point comes first.

use lipfree::dendrogram::{Dendrogram, Merge};
use lipfree::metric::PointedMetricSpace;
use serde::{Deserialize, Serialize};

pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceDocument {
    pub version: u32,
    #[serde(flatten)]
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "lowercase")]
pub enum Body {
    Matrix {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
        distances: Vec<Vec<f64>>,
    },
    Dendrogram {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
        leaves: usize,
        merges: Vec<Merge>,
    },
}

impl SpaceDocument {
    pub fn parse(text: &str) -> Result<Self, String> {
        let doc: SpaceDocument =
            serde_json::from_str(text).map_err(|e| format!("cannot parse space document: {e}"))?;
        if doc.version != DOCUMENT_VERSION {
            return Err(format!(
                "unsupported document version {} (expected {DOCUMENT_VERSION})",
                doc.version
            ));
        }
        Ok(doc)
    }

    /// Builds the space; metric axioms are not checked here.
    pub fn to_space(&self) -> Result<PointedMetricSpace, String> {
        let (space, labels) = match &self.body {
            Body::Matrix { labels, distances } => (
                PointedMetricSpace::from_rows(distances).map_err(|e| e.to_string())?,
                labels,
            ),
            Body::Dendrogram {
                labels,
                leaves,
                merges,
            } => (
                Dendrogram::new(*leaves, merges.clone())
                    .map_err(|e| e.to_string())?
                    .to_space(),
                labels,
            ),
        };
        match labels {
            Some(l) => {
                let mut seen = std::collections::BTreeSet::new();
                if let Some(dup) = l.iter().find(|s| !seen.insert(s.as_str())) {
                    return Err(format!("duplicate label {dup:?}"));
                }
                space.with_labels(l.clone()).map_err(|e| e.to_string())
            }
            None => Ok(space),
        }
    }

    pub fn is_dendrogram(&self) -> bool {
        matches!(self.body, Body::Dendrogram { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_document() {
        let doc = SpaceDocument::parse(
            r#"{"version": 1, "format": "matrix", "labels": ["0", "1", "3"],
                "distances": [[0, 1, 3], [1, 0, 2], [3, 2, 0]]}"#,
        )
        .unwrap();
        let space = doc.to_space().unwrap();
        assert_eq!(space.d(1, 2), 2.0);
        assert_eq!(space.index_of("3"), Some(2));
    }

    #[test]
    fn dendrogram_document() {
        let doc = SpaceDocument::parse(
            r#"{"version": 1, "format": "dendrogram", "leaves": 3,
                "merges": [{"left": 1, "right": 2, "height": 1},
                           {"left": 0, "right": 3, "height": 4}]}"#,
        )
        .unwrap();
        assert!(doc.is_dendrogram());
        let space = doc.to_space().unwrap();
        assert_eq!(space.d(0, 2), 4.0);
        assert_eq!(space.d(1, 2), 1.0);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(SpaceDocument::parse("{").is_err());
        assert!(
            SpaceDocument::parse(r#"{"version": 2, "format": "matrix", "distances": [[0]]}"#)
                .is_err()
        );
        assert!(
            SpaceDocument::parse(r#"{"version": 1, "format": "tree", "distances": [[0]]}"#)
                .is_err()
        );
        let doc = SpaceDocument::parse(
            r#"{"version": 1, "format": "matrix", "labels": ["a", "a"], "distances": [[0, 1], [1, 0]]}"#,
        )
        .unwrap();
        assert!(doc.to_space().is_err());
        let doc =
            SpaceDocument::parse(r#"{"version": 1, "format": "matrix", "distances": [[0, 1]]}"#)
                .unwrap();
        assert!(doc.to_space().is_err());
    }
}
