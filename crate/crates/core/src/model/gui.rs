use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{canonical_sig, read_file, schema_error, MethodSig, ModelError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Widget {
    pub id: String,
    #[serde(rename = "class")]
    pub widget_class: String,
    #[serde(default)]
    pub properties: BTreeMap<String, String>,
    #[serde(default)]
    pub handlers: Vec<MethodSig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screenshot: Option<String>,
    #[serde(default)]
    pub children: Vec<Widget>,
}

impl Widget {
    /// Preorder walk: parent first, children in order.
    pub fn preorder(&self) -> Vec<&Widget> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(w) = stack.pop() {
            out.push(w);
            stack.extend(w.children.iter().rev());
        }
        out
    }

    pub fn count(&self) -> usize {
        1 + self.children.iter().map(Widget::count).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub title: String,
    #[serde(rename = "class")]
    pub window_class: String,
    pub root: Widget,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GuiModel {
    pub windows: Vec<Window>,
}

impl GuiModel {
    /// Checks that widget ids are unique across every window.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = HashSet::new();
        for window in &self.windows {
            for w in window.root.preorder() {
                if !seen.insert(w.id.as_str()) {
                    return Err(ModelError::DuplicateWidgetId(w.id.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn widget_count(&self) -> usize {
        self.windows.iter().map(|w| w.root.count()).sum()
    }

    pub fn widgets(&self) -> impl Iterator<Item = &Widget> {
        self.windows.iter().flat_map(|w| w.root.preorder())
    }

    pub fn find_widget(&self, id: &str) -> Option<&Widget> {
        self.widgets().find(|w| w.id == id)
    }

    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let raw: RawGuiModel =
            serde_json::from_str(text).map_err(|e| schema_error(Path::new("<memory>"), e))?;
        let model = raw.into_model()?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("gui model serializes")
    }
}

pub fn load_gui_model(path: &Path) -> Result<GuiModel, ModelError> {
    let text = read_file(path)?;
    let raw: RawGuiModel = serde_json::from_str(&text).map_err(|e| schema_error(path, e))?;
    let model = raw.into_model()?;
    model.validate()?;
    Ok(model)
}

// Handlers are read as plain strings first so that a bad signature surfaces as
// `MalformedSignature` instead of a generic schema error.
#[derive(Deserialize)]
struct RawGuiModel {
    windows: Vec<RawWindow>,
}

#[derive(Deserialize)]
struct RawWindow {
    title: String,
    class: String,
    root: RawWidget,
}

#[derive(Deserialize)]
struct RawWidget {
    id: String,
    class: String,
    #[serde(default)]
    properties: BTreeMap<String, String>,
    #[serde(default)]
    handlers: Vec<String>,
    #[serde(default)]
    screenshot: Option<String>,
    #[serde(default)]
    children: Vec<RawWidget>,
}

impl RawGuiModel {
    fn into_model(self) -> Result<GuiModel, ModelError> {
        let windows = self
            .windows
            .into_iter()
            .map(|w| {
                Ok(Window {
                    title: w.title,
                    window_class: w.class,
                    root: w.root.into_widget()?,
                })
            })
            .collect::<Result<_, ModelError>>()?;
        Ok(GuiModel { windows })
    }
}

impl RawWidget {
    fn into_widget(self) -> Result<Widget, ModelError> {
        Ok(Widget {
            id: self.id,
            widget_class: self.class,
            properties: self.properties,
            handlers: self
                .handlers
                .iter()
                .map(|h| canonical_sig(h))
                .collect::<Result<_, _>>()?,
            screenshot: self.screenshot,
            children: self
                .children
                .into_iter()
                .map(RawWidget::into_widget)
                .collect::<Result<_, _>>()?,
        })
    }
}
