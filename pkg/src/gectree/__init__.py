"""Build GEC-oriented treebanks by projecting target-side parses onto erroneous sources."""

from gectree.conllu import DepTree, Token, parse_conllu, validate_tree, write_conllu
from gectree.edits import EditSpan, align_tokens, extract_spans, merge_to_spans
from gectree.projection import ProjectedTree, project

__version__ = "0.1.0"
