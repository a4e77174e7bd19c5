"""Tests for prompt templates."""

import pytest

from segment_plus.pipeline import TEMPLATE_SLOTS, PromptTemplate, load_templates
from segment_plus.utils import TemplateError


class TestPromptTemplate:
    """Test suite for PromptTemplate."""

    def test_shipped_templates_declare_exact_slots(self, templates):
        """Test every shipped template carries exactly its slots."""
        for name, slots in TEMPLATE_SLOTS.items():
            assert set(templates[name].slots) == set(slots)

    def test_gather_keeps_json_braces(self, templates):
        """Test literal JSON in the gather prompt survives rendering."""
        prompt = templates.gather.render(segment="SEG", question="Q?")
        assert '"Evidence": "Your evidence content here"' in prompt
        assert "SEG" in prompt and "Q?" in prompt

    def test_render_is_single_pass(self):
        """Test slot values are not expanded again."""
        t = PromptTemplate("t", "A {segment} B {question}", ("segment", "question"))
        out = t.render(segment="{question}", question="q")
        assert out == "A {question} B q"

    def test_render_requires_exact_values(self):
        """Test missing or unknown slot values are rejected."""
        t = PromptTemplate("t", "A {segment}", ("segment",))
        with pytest.raises(TemplateError):
            t.render()
        with pytest.raises(TemplateError):
            t.render(segment="x", other="y")

    def test_declared_slots_must_match(self):
        """Test mismatched templates fail at construction."""
        with pytest.raises(TemplateError):
            PromptTemplate("t", "A {segment}", ("segment", "question"))
        with pytest.raises(TemplateError):
            PromptTemplate("t", "A {segment} {extra}", ("segment",))

    def test_parse_inverts_render(self, templates):
        """Test slot recovery from a rendered prompt."""
        segment = "Line one.\n\nMary moved to the bathroom. {not a slot}"
        prompt = templates.gather.render(segment=segment, question="Where is Mary?")
        assert templates.gather.parse(prompt) == {
            "segment": segment,
            "question": "Where is Mary?",
        }
        assert templates.merge.parse(prompt) is None

    def test_answer_for_falls_back(self, templates):
        """Test per-task answer templates default to the generic one."""
        assert templates.answer_for(None) is templates.answer
        assert templates.answer_for("unknown_kind") is templates.answer


class TestLoadTemplates:
    """Test suite for load_templates."""

    def test_override_directory(self, tmp_path):
        """Test files in an override directory replace shipped ones."""
        (tmp_path / "answer.txt").write_text("Context: {context}\nQ: {question}\nA:\n")
        (tmp_path / "answer_single_fact.txt").write_text("Facts: {context}\nQ: {question}")
        templates = load_templates(tmp_path)
        assert templates.answer.text == "Context: {context}\nQ: {question}\nA:"
        assert templates.answer_for("single_fact").text.startswith("Facts:")
        assert "answer_single_fact" in templates.names()
        assert templates.gather.text == load_templates().gather.text

    def test_bad_override_is_rejected(self, tmp_path):
        """Test an override missing a slot raises TemplateError."""
        (tmp_path / "merge.txt").write_text("Merge these: {notes}")
        with pytest.raises(TemplateError):
            load_templates(tmp_path)
