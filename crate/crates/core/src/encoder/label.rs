use std::fmt;

/// Handle of a state label inside one encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelId(pub(crate) u32);

impl LabelId {
    pub const ROOT: LabelId = LabelId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelInfo {
    pub parent: Option<LabelId>,
    /// Position `n` among the `r`-successors of the parent.
    pub n: u32,
    pub modality: u32,
    pub depth: u32,
}

/// The tree of labels created during one encoding, in creation order.
#[derive(Debug, Clone, Default)]
pub struct LabelTree {
    infos: Vec<LabelInfo>,
}

impl LabelTree {
    pub fn with_root() -> Self {
        Self { infos: vec![LabelInfo { parent: None, n: 1, modality: 0, depth: 0 }] }
    }

    pub fn len(&self) -> usize {
        self.infos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infos.is_empty()
    }

    pub fn info(&self, id: LabelId) -> &LabelInfo {
        &self.infos[id.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = LabelId> {
        (0..self.infos.len() as u32).map(LabelId)
    }

    pub(crate) fn push_child(&mut self, parent: LabelId, n: u32, modality: u32) -> LabelId {
        let depth = self.info(parent).depth + 1;
        let id = LabelId(self.infos.len() as u32);
        self.infos.push(LabelInfo { parent: Some(parent), n, modality, depth });
        id
    }

    /// Path of `(n, r)` steps from the root.
    pub fn path(&self, id: LabelId) -> Vec<(u32, u32)> {
        let mut steps = Vec::new();
        let mut cur = id;
        while let Some(p) = self.info(cur).parent {
            let info = self.info(cur);
            steps.push((info.n, info.modality));
            cur = p;
        }
        steps.reverse();
        steps
    }

    /// Dotted text form: `1`, `1.2`, `1.2.1^3` (the `^r` suffix is omitted
    /// for modality 1).
    pub fn display(&self, id: LabelId) -> String {
        Label(self.path(id)).to_string()
    }
}

/// A label by value, independent of any encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Label(pub Vec<(u32, u32)>);

impl Label {
    pub fn root() -> Self {
        Label(Vec::new())
    }

    pub fn child(&self, n: u32, modality: u32) -> Self {
        let mut steps = self.0.clone();
        steps.push((n, modality));
        Label(steps)
    }

    pub fn parent(&self) -> Option<Label> {
        if self.0.is_empty() {
            None
        } else {
            Some(Label(self.0[..self.0.len() - 1].to_vec()))
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("1")?;
        for &(n, r) in &self.0 {
            if r == 1 {
                write!(f, ".{n}")?;
            } else {
                write!(f, ".{n}^{r}")?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('.');
        if parts.next() != Some("1") {
            return Err(format!("label '{s}' must start with 1"));
        }
        let mut steps = Vec::new();
        for part in parts {
            let (n, r) = match part.split_once('^') {
                Some((n, r)) => (n, r),
                None => (part, "1"),
            };
            let n: u32 = n.parse().map_err(|_| format!("bad label step '{part}'"))?;
            let r: u32 = r.parse().map_err(|_| format!("bad label step '{part}'"))?;
            if n == 0 || r == 0 {
                return Err(format!("bad label step '{part}'"));
            }
            steps.push((n, r));
        }
        Ok(Label(steps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse() {
        let mut t = LabelTree::with_root();
        let a = t.push_child(LabelId::ROOT, 2, 1);
        let b = t.push_child(a, 1, 3);
        assert_eq!(t.display(LabelId::ROOT), "1");
        assert_eq!(t.display(a), "1.2");
        assert_eq!(t.display(b), "1.2.1^3");
        let parsed: Label = "1.2.1^3".parse().unwrap();
        assert_eq!(parsed, Label(t.path(b)));
        assert_eq!(parsed.to_string(), "1.2.1^3");
        assert!("2.1".parse::<Label>().is_err());
        assert!("1.0".parse::<Label>().is_err());
        assert_eq!(parsed.parent().unwrap().to_string(), "1.2");
    }
}
