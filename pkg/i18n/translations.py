"""
Internationalization of the report strings
"""
import json
from pathlib import Path
from config import LANGUAGE

LOCALES = Path(__file__).parent / 'locales'


class Translator:
    def __init__(self, language='en'):
        self.language = language
        self.translations = {}
        self.load_translations()

    def load_translations(self):
        """Loads translations from the JSON file"""
        locale_file = LOCALES / f'{self.language}.json'

        if not locale_file.exists():
            # Fallback to English if the language file does not exist
            locale_file = LOCALES / 'en.json'

        with open(locale_file, 'r', encoding='utf-8') as f:
            self.translations = json.load(f)

    def t(self, key, **kwargs):
        """
        Translates a key with optional parameters

        Args:
            key: Key in "section.key" format
            **kwargs: Parameters to substitute in the text

        Returns:
            Translated text with substituted parameters
        """
        value = self.translations
        for k in key.split('.'):
            if not isinstance(value, dict):
                return key
            value = value.get(k)

        if value is None:
            return key

        if kwargs:
            try:
                return value.format(**kwargs)
            except KeyError:
                return value

        return value


# Global instance of the translator
_translator = Translator(LANGUAGE)


def t(key, **kwargs):
    """Helper function for translation"""
    return _translator.t(key, **kwargs)


def set_language(language: str):
    """Switches the global translator, e.g. for --lang"""
    global _translator
    if language != _translator.language:
        _translator = Translator(language)


def get_translator():
    """Gets the translator instance"""
    return _translator
